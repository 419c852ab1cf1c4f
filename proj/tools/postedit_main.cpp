#include "postedit/cli.hpp"

int main(int argc, char** argv) { return postedit::cli::main(argc, argv); }
