#pragma once

namespace citegraph {

// Keeps large freed blocks in the heap instead of returning them to the OS,
// which avoids page-fault churn from the matrices built every training epoch.
// No-op outside glibc.
void tune_allocator();

}  // namespace citegraph
