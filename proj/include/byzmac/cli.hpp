#pragma once

// Command-line front end. Senders/slots are 1-based on the command line and
// in exported tables; alphabet symbols are the raw values 0..n-1.

#include <iosfwd>
#include <string>
#include <vector>

namespace byzmac {

// Runs the CLI on already-split arguments (no program name). Returns the
// process exit code: 0 success, 1 assertion failure, 2 usage or parse error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace byzmac
