// Error types shared across the toolkit. The CLI maps them onto exit codes
// (config -> 2, data -> 3, diverged -> 4), the C API onto status codes.
#pragma once

#include <stdexcept>
#include <string>

namespace ernn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration / preconditions chosen by the caller.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or incompatible input data (corpus files, embeddings, checkpoints).
struct DataError : Error {
  using Error::Error;
};

// Loss became non-finite during training.
struct TrainingDiverged : Error {
  int epoch;
  TrainingDiverged(const std::string& msg, int epoch_)
      : Error(msg), epoch(epoch_) {}
};

// Contract violation inside the library itself.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace ernn
