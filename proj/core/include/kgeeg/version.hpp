#pragma once

namespace kgeeg {

// `git describe` of the source tree at configure time, or "unknown".
const char* code_version();

}  // namespace kgeeg
