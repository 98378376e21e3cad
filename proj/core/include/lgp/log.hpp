#pragma once

#include <functional>
#include <string>

namespace lgp {

using WarningSink = std::function<void(const std::string&)>;

/// Installs the receiver of library warnings and returns the previous one.
/// The default sink writes to stderr.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace lgp
