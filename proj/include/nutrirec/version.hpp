#pragma once

namespace nutrirec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nutrirec
