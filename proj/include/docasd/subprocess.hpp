#pragma once

#include <chrono>
#include <string>

namespace docasd {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal or timed out
  bool timed_out = false;
  std::string out;
  std::string err;
};

// Runs `command` through /bin/sh -c, feeding `input` on stdin. The child is
// killed once `timeout` elapses.
ProcessResult run_shell(const std::string& command, const std::string& input,
                        std::chrono::milliseconds timeout);

}  // namespace docasd
