// Placeholder entry point; the subcommand front end lands with the
// experiments module.
int main() { return 0; }
