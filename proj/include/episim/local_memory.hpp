#pragma once

#include "episim/isa.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace epi {

enum class Port : std::uint8_t { NetworkWrite, DmaRead, LoadStore, Fetch };
inline constexpr unsigned kPortCount = 4;
// Lower index wins a bank conflict.
inline constexpr std::array<Port, kPortCount> kPortPriority = {Port::NetworkWrite, Port::DmaRead,
                                                               Port::LoadStore, Port::Fetch};
const char* to_string(Port p);

inline constexpr unsigned kBankCount = 4;
inline constexpr unsigned kBankWidth = 8;

constexpr unsigned bank_of(std::uint32_t addr) { return (addr >> 3) & (kBankCount - 1); }

struct PortRequest {
  Port port = Port::LoadStore;
  std::uint32_t addr = 0;
  Width width = Width::B32;
  bool write = false;
};

struct Arbitration {
  std::vector<PortRequest> granted;
  std::vector<PortRequest> stalled;
  std::vector<PortRequest> faulted;
};

// Bank claims accumulated over one cycle. Higher-priority ports claim first,
// so callers must present requests in kPortPriority order (arbitrate_cycle
// does this for a whole request set).
class BankClaims {
public:
  bool claim(std::uint32_t addr) {
    const unsigned b = bank_of(addr);
    if (busy_[b]) return false;
    busy_[b] = true;
    return true;
  }
  bool busy(unsigned bank) const { return busy_[bank]; }
  void clear() { busy_ = {}; }
  unsigned used() const { return unsigned(busy_[0]) + busy_[1] + busy_[2] + busy_[3]; }

private:
  std::array<bool, kBankCount> busy_{};
};

class Scratchpad {
public:
  explicit Scratchpad(std::uint32_t size = 32 * 1024);

  std::uint32_t size() const { return std::uint32_t(bytes_.size()); }
  bool valid(std::uint32_t addr, Width w) const {
    return addr % bytes_of(w) == 0 && std::uint64_t(addr) + bytes_of(w) <= bytes_.size();
  }

  // Throw Error(MemoryFault) when misaligned or out of range.
  std::uint64_t read(std::uint32_t addr, Width w) const;
  void write(std::uint32_t addr, Width w, std::uint64_t value);

  // Byte-granular access for images and host transfers.
  void read_bytes(std::uint32_t addr, std::uint8_t* out, std::size_t n) const;
  void write_bytes(std::uint32_t addr, const std::uint8_t* in, std::size_t n);
  void clear();

  // Requests on distinct banks are all granted; on a conflict the port with
  // the higher priority wins. Granted writes are applied.
  Arbitration arbitrate_cycle(std::vector<PortRequest> requests,
                              const std::vector<std::uint64_t>& write_values = {});

  const std::vector<std::uint8_t>& raw() const { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

} // namespace epi
