#pragma once

#include <cstdint>
#include <string>

// Assembly sources for the bundled kernels. Every generator returns text for
// `assemble`; timed kernels store the cycle count of their measured region
// (first MOVFS CYCLES to second) at local offset kResult and TRAP #0.
namespace epi::kernels {

inline constexpr std::uint32_t kResult = 0x7000;
inline constexpr std::uint32_t kData = 0x6000;
inline constexpr std::uint32_t kLockArea = 0x4000;

// `pairs` FMADD + ADD pairs, four independent accumulators.
std::string fmadd_stream(unsigned pairs);
// The same body wrapped in a counted loop. With `taken` false the loop is
// unrolled and each iteration ends in a branch that is never taken.
std::string fmadd_loop(unsigned iterations, unsigned pairs, bool taken);
// SUB / BNE loop and the same instruction pair with the branch never taken.
std::string branch_loop(unsigned iterations, bool taken);
// LDR followed by an ADD that does or does not consume the loaded value.
std::string load_use(unsigned count, bool dependent);
// Chain of dependent FADDs.
std::string fpu_chain(unsigned count, bool truncate);
// Unrolled remote stores, or blocking remote loads, to `target`.
std::string remote_stream(std::uint32_t target, unsigned count, bool reads);

// Lock word at `lock`, round counter at lock+4, owner log at lock+0x100.
// Each core stores the number of rounds it owned at kResult.
std::string testset_mutex(std::uint32_t lock, unsigned rounds, unsigned pad = 0);
// `rounds` barrier episodes, each preceded by `work` delay iterations. The
// CYCLES value after each release is appended from kResult onwards.
std::string wand_barrier(unsigned rounds, unsigned work);
// Token ping-pong through mailboxes at kData.
std::string ping(std::uint32_t peer, unsigned rounds, bool initiator);
std::string multicast_store(std::uint32_t dest, std::uint32_t value);

// Ordering litmus programs. `pad` NOPs precede the first store.
std::string two_writes(std::uint32_t first, std::uint32_t second, unsigned pad);
std::string mp_producer(std::uint32_t data, std::uint32_t flag, bool barrier, unsigned pad);
// Polls its own kData word for 1, then loads `data` into kResult.
std::string mp_consumer(std::uint32_t data, unsigned pad);

} // namespace epi::kernels
