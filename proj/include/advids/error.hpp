#pragma once

#include <stdexcept>
#include <string>

namespace advids {

/// Base class for every error thrown by this library.
struct advids_error : std::runtime_error {
    explicit advids_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value (bad architecture, negative epsilon, ...).
struct config_error : advids_error {
    using advids_error::advids_error;
};

/// Dimension mismatch between tensors, or a trace that does not fit the net.
struct shape_error : advids_error {
    using advids_error::advids_error;
};

/// Non-finite values where finite ones are required.
struct numeric_error : advids_error {
    using advids_error::advids_error;
};

/// Bad data: labels outside {0,1}, empty splits, schema problems.
struct data_error : advids_error {
    using advids_error::advids_error;
};

/// CSV cell/row level parse failure; the message names the offending row.
struct parse_error : advids_error {
    using advids_error::advids_error;
};

/// File could not be opened, read or written.
struct io_error : advids_error {
    using advids_error::advids_error;
};

/// Training produced a non-finite loss; the message names the epoch.
struct divergence_error : advids_error {
    explicit divergence_error(const std::string& what, int epoch_index)
        : advids_error(what), epoch(epoch_index) {}
    int epoch;
};

}  // namespace advids
