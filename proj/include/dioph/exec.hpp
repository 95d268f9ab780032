#pragma once

namespace dioph {

/// Selects the OpenMP kernel or its serial reference. Both must produce
/// identical results; the serial path is what the tests compare against.
enum class Exec { serial, parallel };

}  // namespace dioph
