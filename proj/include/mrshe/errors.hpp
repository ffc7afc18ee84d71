#pragma once

#include <stdexcept>
#include <string>

namespace mrshe {

// Bad configuration or input: malformed descriptor, CFL violation without an
// explicit override, unresolvable path. CLI exit status 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite data fed to a numeric routine.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller broke an API contract (dimension mismatch, invalid bracket).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

// The explicit scheme produced a non-finite state. CLI exit status 3.
struct blowup_error : std::runtime_error {
  blowup_error(const std::string& msg, int step_index)
      : std::runtime_error(msg), step(step_index) {}
  int step;
};

// A checked scientific bound failed. CLI exit status 4.
struct bound_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mrshe
