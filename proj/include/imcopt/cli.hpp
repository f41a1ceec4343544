#pragma once

namespace imcopt {

// Full command-line front end; returns the process exit code.
// Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 infeasible, 4 oracle,
// 5 resource cap.
int run_cli(int argc, const char* const* argv);

}  // namespace imcopt
