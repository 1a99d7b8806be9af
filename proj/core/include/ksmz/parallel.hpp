#ifndef KSMZ_PARALLEL_HPP
#define KSMZ_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ksmz {

int default_jobs();

/// Runs `run_block(block_index, begin, end)` over [0, n) split into blocks of
/// `block_size` items. Blocks are claimed dynamically by `jobs` workers, but
/// the block structure itself is fixed, so per-block results reduced in block
/// order are bit-identical for any job count. Worker exceptions are rethrown
/// on the calling thread.
void parallel_blocks(std::size_t n, std::size_t block_size, int jobs,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& run_block);

/// Item-wise convenience: f(i) for i in [0, n), each item expected to write
/// only its own slot of caller-owned storage.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace ksmz

#endif
