#ifndef EEGFEAT_CLI_HPP
#define EEGFEAT_CLI_HPP

#include <string>
#include <vector>

namespace eegfeat {

// Full command-line entry point (args exclude argv[0]). Returns the process
// exit status: 0 success, 1 configuration error, 2 data error.
int run_cli(const std::vector<std::string>& args);

} // namespace eegfeat

#endif
