#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bhavnet::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kVocabularyError = 3,
  kCheckpointError = 4,
};

// Environment variable naming the directory that holds run directories.
inline constexpr const char* kRunRootEnv = "BHAVNET_RUN_ROOT";

// Entry point with injectable streams; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bhavnet::cli
