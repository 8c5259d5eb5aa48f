#include "episim/local_memory.hpp"

#include "episim/error.hpp"

#include <algorithm>
#include <cstring>

namespace epi {

const char* to_string(Port p) {
  switch (p) {
  case Port::NetworkWrite: return "NetworkWrite";
  case Port::DmaRead: return "DmaRead";
  case Port::LoadStore: return "LoadStore";
  case Port::Fetch: return "Fetch";
  }
  return "?";
}

Scratchpad::Scratchpad(std::uint32_t size) : bytes_(size, 0) {
  if (size == 0 || size > kBankWidth * (1u << 17))
    throw Error(ErrorCode::InvalidConfig, "scratchpad size must be in (0, 1 MiB]");
}

std::uint64_t Scratchpad::read(std::uint32_t addr, Width w) const {
  if (!valid(addr, w))
    throw Error(ErrorCode::MemoryFault, "bad local read at offset " + std::to_string(addr));
  std::uint64_t v = 0;
  for (unsigned k = 0; k < bytes_of(w); ++k)
    v |= std::uint64_t(bytes_[addr + k]) << (8 * k);
  return v;
}

void Scratchpad::write(std::uint32_t addr, Width w, std::uint64_t value) {
  if (!valid(addr, w))
    throw Error(ErrorCode::MemoryFault, "bad local write at offset " + std::to_string(addr));
  for (unsigned k = 0; k < bytes_of(w); ++k)
    bytes_[addr + k] = std::uint8_t(value >> (8 * k));
}

void Scratchpad::read_bytes(std::uint32_t addr, std::uint8_t* out, std::size_t n) const {
  if (std::uint64_t(addr) + n > bytes_.size())
    throw Error(ErrorCode::MemoryFault, "local range out of bounds");
  std::memcpy(out, bytes_.data() + addr, n);
}

void Scratchpad::write_bytes(std::uint32_t addr, const std::uint8_t* in, std::size_t n) {
  if (std::uint64_t(addr) + n > bytes_.size())
    throw Error(ErrorCode::MemoryFault, "local range out of bounds");
  std::memcpy(bytes_.data() + addr, in, n);
}

void Scratchpad::clear() { std::fill(bytes_.begin(), bytes_.end(), 0); }

Arbitration Scratchpad::arbitrate_cycle(std::vector<PortRequest> requests,
                                        const std::vector<std::uint64_t>& write_values) {
  std::vector<std::uint64_t> values = write_values;
  values.resize(requests.size(), 0);
  std::vector<std::size_t> order(requests.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return unsigned(requests[a].port) < unsigned(requests[b].port);
  });

  Arbitration out;
  BankClaims claims;
  for (std::size_t k : order) {
    const PortRequest& r = requests[k];
    if (!valid(r.addr, r.width)) {
      out.faulted.push_back(r);
      continue;
    }
    if (!claims.claim(r.addr)) {
      out.stalled.push_back(r);
      continue;
    }
    if (r.write)
      write(r.addr, r.width, values[k]);
    out.granted.push_back(r);
  }
  return out;
}

} // namespace epi
