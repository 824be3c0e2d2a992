#pragma once

#include <stdexcept>
#include <string>

namespace surfeit {

// Base class for every failure the library reports deliberately.  Callers
// that want blanket handling catch Error; tests catch the concrete types.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SURFEIT_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(what) {}     \
  }

// boundary calculus
SURFEIT_DEFINE_ERROR(NonZeroMean);        // antiderivative of non-mean-free data
SURFEIT_DEFINE_ERROR(GridMismatch);       // operands live on different grids

// forward models
SURFEIT_DEFINE_ERROR(UnknownFamily);
SURFEIT_DEFINE_ERROR(DegenerateParameters);
SURFEIT_DEFINE_ERROR(BoundaryLengthChanged);
SURFEIT_DEFINE_ERROR(SolverFailure);
SURFEIT_DEFINE_ERROR(NonConvergence);

// trace equations
SURFEIT_DEFINE_ERROR(DenominatorDegenerate);
SURFEIT_DEFINE_ERROR(Inconclusive);
SURFEIT_DEFINE_ERROR(RankAmbiguous);
SURFEIT_DEFINE_ERROR(AnchorNotFound);
SURFEIT_DEFINE_ERROR(CodimMismatch);
SURFEIT_DEFINE_ERROR(MinimizerEscaped);
SURFEIT_DEFINE_ERROR(NotInKernel);

// argument principle / reconstruction
SURFEIT_DEFINE_ERROR(TooCloseToCurve);
SURFEIT_DEFINE_ERROR(NotAdmissible);
SURFEIT_DEFINE_ERROR(QuadratureDegraded);
SURFEIT_DEFINE_ERROR(CoverageGap);
SURFEIT_DEFINE_ERROR(ImmersionFailure);
SURFEIT_DEFINE_ERROR(ChartSingular);

// correspondences
SURFEIT_DEFINE_ERROR(ImmediateFocusing);
SURFEIT_DEFINE_ERROR(MultipleMinima);
SURFEIT_DEFINE_ERROR(NewtonDiverged);
SURFEIT_DEFINE_ERROR(DegenerateDifferential);
SURFEIT_DEFINE_ERROR(EquivarianceBroken);

// configuration / CLI
SURFEIT_DEFINE_ERROR(ConfigError);

#undef SURFEIT_DEFINE_ERROR

}  // namespace surfeit
