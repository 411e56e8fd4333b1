#pragma once

namespace mitk {

// Selects the plain loop reference or the OpenMP version of a kernel. Both
// produce bitwise-identical results.
enum class Execution { kSerial, kParallel };

}  // namespace mitk
