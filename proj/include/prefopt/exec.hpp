#pragma once

namespace prefopt {

/// Selects the OpenMP kernel or its serial reference. Both produce
/// bit-identical results: parallelism is only over independent outputs and
/// every reduction runs in a fixed order.
enum class Exec { serial, parallel };

}  // namespace prefopt
