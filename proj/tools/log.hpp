#pragma once

#include <string_view>

namespace psd::cli {

// stderr logging. Color is used on a terminal unless PSD_NO_COLOR is set.
void log_info(std::string_view msg);
void log_warn(std::string_view msg);

/// The single machine-parsable failure line: error kind=<Kind> message=<text>
void log_error(std::string_view kind, std::string_view msg);

}  // namespace psd::cli
