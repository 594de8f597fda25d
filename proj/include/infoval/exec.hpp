#pragma once

namespace infoval {

/// Execution policy for the data-parallel kernels. The serial variant is
/// the reference implementation; the parallel variant shards independent
/// work items (grid beliefs, trajectories, curve rows) across OpenMP
/// threads and must produce bit-identical results.
enum class Exec { serial, parallel };

}  // namespace infoval
