#ifndef MSBOP_PARALLEL_HPP
#define MSBOP_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <string>

namespace msbop {

// Worker cap shared by all modules. 0 means "use hardware concurrency".
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for i in [0, n). Iterations must be independent; the split
// into contiguous chunks never affects results since each index writes
// only its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Emits a warning on stderr unless warnings are silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace msbop

#endif
