#pragma once

namespace metacoop {

// Stamped into every resolved config so an artifact names the code that made it.
inline constexpr const char* kCodeVersion = "metacoop-0.1.0";

}  // namespace metacoop
