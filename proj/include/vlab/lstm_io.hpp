#pragma once

#include "vlab/lstm.hpp"

#include <filesystem>
#include <iosfwd>

namespace vlab::lstm {

inline constexpr int kModelContainerVersion = 1;

/// Text container: a `vlab-lstm <version>` magic line, config and scaler
/// records, the loss history, then one `tensor <name> <rows> <cols>` record
/// per weight tensor followed by its column-major values.
void write_model(std::ostream& out, const TrainedLstm& model);
void save_model(const std::filesystem::path& path, const TrainedLstm& model);

/// Throws DataError on malformed input or shape mismatch with the config.
[[nodiscard]] TrainedLstm read_model(std::istream& in);
[[nodiscard]] TrainedLstm load_model(const std::filesystem::path& path);

/// `epoch,train_loss,val_loss` with a header row.
void write_loss_csv(std::ostream& out, const TrainedLstm& model);

}  // namespace vlab::lstm
