#include "gpa/cli.hpp"

int main(int argc, char** argv) { return gpa::run_cli(argc, argv); }
