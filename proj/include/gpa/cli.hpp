#pragma once

namespace gpa {

// Full command-line surface (simulate | fit | predict | bandwidth | bench).
// Returns the process exit code: 0 ok, 1 runtime failure, 2 usage/IO error.
int run_cli(int argc, char** argv);

}  // namespace gpa
