#pragma once

namespace bessched {

/// Selects between the serial reference path and the OpenMP path of a kernel.
/// Both paths produce identical results; the serial one is kept for testing
/// and as the baseline of the benchmark target.
enum class Execution { Serial, Parallel };

}  // namespace bessched
