#pragma once

#include <string>
#include <vector>

namespace metascat {

// Entry point shared by the metascat binary and in-process tests.
// Returns the process exit status: 0 on success, 1 on runtime errors,
// 2 on usage errors; errors print one line to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace metascat
