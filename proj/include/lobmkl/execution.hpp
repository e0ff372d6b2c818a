#pragma once

namespace lobmkl {

// Every parallel kernel in the library has a serial twin selected by this
// flag. Both paths must produce bit-identical results.
enum class Execution { Serial, Parallel };

}  // namespace lobmkl
