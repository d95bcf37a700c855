#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace sigverify::cli {

// Parses and executes one command line (arguments without the program
// name). Returns the process exit code: 0 success, 1 usage or contract
// error, 2 parse, data, or I/O failure. All writing goes through the given
// streams so tests can run commands in-process and capture their output.
int run_cli(const std::vector<std::string>& args,
            std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace sigverify::cli
