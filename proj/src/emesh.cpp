#include "episim/emesh.hpp"

#include "episim/error.hpp"

#include <algorithm>
#include <cstdio>

namespace epi {

const char* to_string(MeshId m) {
  switch (m) {
  case MeshId::R: return "rMesh";
  case MeshId::C: return "cMesh";
  case MeshId::X: return "xMesh";
  }
  return "?";
}

const char* to_string(Dir d) {
  switch (d) {
  case Dir::N: return "N";
  case Dir::S: return "S";
  case Dir::E: return "E";
  case Dir::W: return "W";
  case Dir::Hub: return "Hub";
  }
  return "?";
}

Dir opposite(Dir d) {
  switch (d) {
  case Dir::N: return Dir::S;
  case Dir::S: return Dir::N;
  case Dir::E: return Dir::W;
  case Dir::W: return Dir::E;
  case Dir::Hub: return Dir::Hub;
  }
  return Dir::Hub;
}

const char* to_string(PacketKind k) {
  switch (k) {
  case PacketKind::Write: return "write";
  case PacketKind::ReadRequest: return "read_request";
  case PacketKind::ReadReply: return "read_reply";
  case PacketKind::Multicast: return "multicast";
  }
  return "?";
}

Dir route_decision(NodeAddress here, NodeAddress dest) {
  if (dest.col != here.col)
    return dest.col > here.col ? Dir::E : Dir::W;
  if (dest.row != here.row)
    return dest.row > here.row ? Dir::S : Dir::N;
  return Dir::Hub;
}

std::optional<MeshId> select_mesh(PacketKind kind, std::uint32_t dest, NodeAddress sender,
                                  const PlatformConfig& config) {
  const NodeAddress node = decode_address(dest).node;
  const bool core = config.is_core(node);
  const bool window = config.window_of(node).has_value();
  switch (kind) {
  case PacketKind::ReadRequest:
    if (core || window) return MeshId::R;
    return std::nullopt;
  case PacketKind::Write:
    if (core) return MeshId::C;
    if (window) return MeshId::X;
    return std::nullopt;
  case PacketKind::Multicast:
    return MeshId::C;
  case PacketKind::ReadReply: {
    if (!core) return std::nullopt;
    const auto a = config.chip_of(sender);
    return a && a == config.chip_of(node) ? MeshId::C : MeshId::X;
  }
  }
  return std::nullopt;
}

namespace {

NodeAddress step_node(NodeAddress n, Dir d) {
  switch (d) {
  case Dir::N: return {std::uint8_t(n.row - 1), n.col};
  case Dir::S: return {std::uint8_t(n.row + 1), n.col};
  case Dir::E: return {n.row, std::uint8_t(n.col + 1)};
  case Dir::W: return {n.row, std::uint8_t(n.col - 1)};
  case Dir::Hub: return n;
  }
  return n;
}

bool on_grid(NodeAddress n, Dir d) {
  if (d == Dir::N) return n.row > 0;
  if (d == Dir::S) return n.row < kMeshDim - 1;
  if (d == Dir::W) return n.col > 0;
  if (d == Dir::E) return n.col < kMeshDim - 1;
  return true;
}

std::vector<Dir> multicast_candidates(const Packet& p) {
  switch (p.travel) {
  case Dir::Hub: return {Dir::E, Dir::W, Dir::N, Dir::S};
  case Dir::E: case Dir::W: return {p.travel, Dir::N, Dir::S};
  default: return {p.travel};
  }
}

constexpr std::uint8_t bit(Dir d) { return std::uint8_t(1u << unsigned(d)); }

} // namespace

std::vector<Dir> multicast_forward(const Packet& p, NodeAddress here, const PlatformConfig& config) {
  std::vector<Dir> out;
  for (Dir d : multicast_candidates(p))
    if (on_grid(here, d) && config.is_core(step_node(here, d)))
      out.push_back(d);
  return out;
}

std::string to_csv(const TraceRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu,%s,%s,%u,%u,%s,0x%08x", (unsigned long long)r.cycle,
                to_string(r.mesh), r.event, unsigned(r.at.row), unsigned(r.at.col), to_string(r.kind),
                r.dest);
  return buf;
}

Mesh::Mesh(const PlatformConfig& config, MeshClient* client)
    : config_(config), client_(client), origin_(config.origin()), rows_(config.rows()),
      cols_(config.cols()) {
  config_.validate();
  const std::size_t n = std::size_t(rows_) * cols_;
  routers_.resize(n);
  chip_.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    chip_[k] = std::uint16_t(*config_.chip_of(node_at(k)));
  buckets_.resize(config_.chips.size() * 8);
  link_bytes_.resize(n);
  link_packets_.resize(n);
}

bool Mesh::contains(NodeAddress n) const {
  return n.row >= origin_.row && n.row < origin_.row + rows_ && n.col >= origin_.col &&
         n.col < origin_.col + cols_;
}

std::size_t Mesh::index(NodeAddress n) const {
  return std::size_t(n.row - origin_.row) * cols_ + (n.col - origin_.col);
}

NodeAddress Mesh::node_at(std::size_t idx) const {
  return {std::uint8_t(origin_.row + idx / cols_), std::uint8_t(origin_.col + idx % cols_)};
}

std::optional<std::size_t> Mesh::neighbor(std::size_t idx, Dir d) const {
  const std::size_t r = idx / cols_, c = idx % cols_;
  switch (d) {
  case Dir::N: return r > 0 ? std::optional(idx - cols_) : std::nullopt;
  case Dir::S: return r + 1 < rows_ ? std::optional(idx + cols_) : std::nullopt;
  case Dir::W: return c > 0 ? std::optional(idx - 1) : std::nullopt;
  case Dir::E: return c + 1 < cols_ ? std::optional(idx + 1) : std::nullopt;
  case Dir::Hub: return idx;
  }
  return std::nullopt;
}

Mesh::Bucket& Mesh::bucket(std::size_t idx, Dir side, bool inbound) {
  return buckets_[chip_[idx] * 8u + unsigned(side) * 2u + (inbound ? 1u : 0u)];
}

const Mesh::Bucket& Mesh::bucket(std::size_t idx, Dir side, bool inbound) const {
  return buckets_[chip_[idx] * 8u + unsigned(side) * 2u + (inbound ? 1u : 0u)];
}

double Mesh::bucket_cap() const { return std::max(8.0, config_.elink_bytes_per_cycle); }

void Mesh::emit(std::uint64_t cycle, MeshId m, const char* ev, NodeAddress at, const Packet& p) {
  if (trace_)
    trace_({cycle, m, ev, at, p.kind, p.dest});
}

std::uint8_t Mesh::wanted_outputs(std::size_t idx, const Packet& p) {
  const NodeAddress here = node_at(idx);
  if (p.kind == PacketKind::Multicast) {
    std::uint8_t mask = 0;
    for (Dir d : multicast_candidates(p))
      if (neighbor(idx, d)) mask |= bit(d);
    if (p.travel != Dir::Hub && client_ && client_->multicast_match(here, p.match()))
      mask |= bit(Dir::Hub);
    return mask;
  }
  return bit(route_decision(here, decode_address(p.dest).node));
}

bool Mesh::can_inject(NodeAddress at, MeshId m) const {
  if (!contains(at)) return false;
  return routers_[index(at)].in[unsigned(m)][unsigned(Dir::Hub)].count < 2;
}

bool Mesh::inject(NodeAddress at, Packet p, std::uint64_t cycle) {
  if (!can_inject(at, p.mesh)) return false;
  Router& r = routers_[index(at)];
  p.id = next_id_++;
  p.inject_cycle = cycle;
  p.hops = 0;
  p.travel = Dir::Hub;
  r.in[unsigned(p.mesh)][unsigned(Dir::Hub)].push(p);
  ++r.load;
  ++r.mload[unsigned(p.mesh)];
  ++counters_.injected;
  emit(cycle, p.mesh, "inject", at, p);
  return true;
}

bool Mesh::can_inject_edge(NodeAddress edge, Dir side, MeshId m, unsigned bytes) const {
  if (!contains(edge) || side == Dir::Hub) return false;
  const std::size_t idx = index(edge);
  if (neighbor(idx, side)) return false;
  return routers_[idx].in[unsigned(m)][unsigned(side)].count < 2 &&
         bucket(idx, side, true).tokens >= bytes;
}

bool Mesh::inject_edge(NodeAddress edge, Dir side, Packet p, std::uint64_t cycle) {
  if (!can_inject_edge(edge, side, p.mesh, p.link_bytes())) return false;
  const std::size_t idx = index(edge);
  bucket(idx, side, true).tokens -= p.link_bytes();
  p.id = next_id_++;
  p.inject_cycle = cycle;
  p.hops = 0;
  routers_[idx].in[unsigned(p.mesh)][unsigned(side)].push(p);
  ++routers_[idx].load;
  ++routers_[idx].mload[unsigned(p.mesh)];
  ++counters_.injected;
  emit(cycle, p.mesh, "inject", edge, p);
  return true;
}

void Mesh::compute(std::uint64_t cycle) {
  (void)cycle;
  grants_.clear();
  const double cap = bucket_cap();
  for (Bucket& b : buckets_)
    b.tokens = std::min(cap, b.tokens + config_.elink_bytes_per_cycle);

  for (std::size_t idx = 0; idx < routers_.size(); ++idx) {
    Router& r = routers_[idx];
    if (r.load == 0) continue;
    const NodeAddress here = node_at(idx);

    for (unsigned m = 0; m < kMeshCount; ++m)
      for (unsigned k = 0; k < kDirCount && r.mload[m]; ++k) {
        Input& in = r.in[m][k];
        if (in.count && !in.routed) {
          in.pending = wanted_outputs(idx, in.front());
          in.routed = true;
          in.granted = 0;
        }
        if (in.count && in.pending == 0)
          grants_.push_back({std::uint32_t(idx), std::uint8_t(m), std::uint8_t(k), kExpire});
      }

    for (unsigned m = 0; m < kMeshCount; ++m) {
      if (!r.mload[m]) continue;
      for (unsigned o = 0; o < 4; ++o) {
        const Dir out = Dir(o);
        const auto nb = neighbor(idx, out);
        if (nb && routers_[*nb].in[m][unsigned(opposite(out))].count >= 2)
          continue;
        for (unsigned j = 0; j < kDirCount; ++j) {
          const unsigned k = (r.rr[m][o] + j) % kDirCount;
          const Input& in = r.in[m][k];
          if (!in.count || !(in.pending & bit(out))) continue;
          const Packet& p = in.front();
          bool ok = true;
          if (nb) {
            if (chip_[*nb] != chip_[idx]) {
              Bucket& b = bucket(idx, out, false);
              ok = b.tokens >= p.link_bytes();
              if (ok) b.tokens -= p.link_bytes();
            }
          } else if (config_.window_of(decode_address(p.dest).node)) {
            Bucket& b = bucket(idx, out, false);
            ok = b.tokens >= p.link_bytes() && client_ && client_->can_egress(here, out, p);
            if (ok) b.tokens -= p.link_bytes();
          }
          if (!ok) continue;
          grants_.push_back({std::uint32_t(idx), std::uint8_t(m), std::uint8_t(k), std::uint8_t(o)});
          r.rr[m][o] = std::uint8_t((k + 1) % kDirCount);
          break;
        }
      }
    }

    // One ejection per node per cycle, shared round-robin by the meshes.
    std::array<int, kMeshCount> cand{-1, -1, -1};
    for (unsigned m = 0; m < kMeshCount; ++m) {
      if (!r.mload[m]) continue;
      const unsigned h = unsigned(Dir::Hub);
      for (unsigned j = 0; j < kDirCount; ++j) {
        const unsigned k = (r.rr[m][h] + j) % kDirCount;
        const Input& in = r.in[m][k];
        if (!in.count || !(in.pending & bit(Dir::Hub))) continue;
        if (client_ && !client_->can_eject(here, in.front())) continue;
        cand[m] = int(k);
        break;
      }
    }
    for (unsigned j = 0; j < kMeshCount; ++j) {
      const unsigned m = (r.eject_rr + j) % kMeshCount;
      if (cand[m] < 0) continue;
      grants_.push_back({std::uint32_t(idx), std::uint8_t(m), std::uint8_t(cand[m]),
                         std::uint8_t(Dir::Hub)});
      r.rr[m][unsigned(Dir::Hub)] = std::uint8_t((cand[m] + 1) % kDirCount);
      r.eject_rr = std::uint8_t((m + 1) % kMeshCount);
      break;
    }
  }
}

void Mesh::commit(std::uint64_t cycle) {
  struct Handoff {
    std::size_t idx;
    Dir side;
    Packet p;
  };
  std::vector<Handoff> ejected, egressed, lost;

  for (const Grant& g : grants_) {
    Router& r = routers_[g.node];
    Input& in = r.in[g.mesh][g.input];
    if (g.output == kExpire) continue;
    const Dir out = Dir(g.output);
    const Packet& p = in.front();
    in.pending &= std::uint8_t(~bit(out));
    ++in.granted;
    if (out == Dir::Hub) {
      ejected.push_back({g.node, out, p});
      continue;
    }
    const auto nb = neighbor(g.node, out);
    if (!nb) {
      if (config_.window_of(decode_address(p.dest).node))
        egressed.push_back({g.node, out, p});
      else
        lost.push_back({g.node, out, p});
      continue;
    }
    Packet q = p;
    ++q.hops;
    if (q.kind == PacketKind::Multicast) q.travel = out;
    routers_[*nb].in[g.mesh][unsigned(opposite(out))].push(q);
    ++routers_[*nb].load;
    ++routers_[*nb].mload[g.mesh];
    link_bytes_[g.node][g.output] += q.link_bytes();
    ++link_packets_[g.node][g.output];
    max_link_bytes_cycle_ = std::max(max_link_bytes_cycle_, q.link_bytes());
    emit(cycle, MeshId(g.mesh), "hop", node_at(*nb), q);
  }

  for (const Grant& g : grants_) {
    Router& r = routers_[g.node];
    Input& in = r.in[g.mesh][g.input];
    if (!in.count || !in.routed || in.pending != 0) continue;
    if (in.granted == 0) {
      ++counters_.expired;
      emit(cycle, MeshId(g.mesh), "expire", node_at(g.node), in.front());
    } else {
      counters_.spawned += in.granted - 1u;
    }
    in.pop();
    --r.load;
    --r.mload[g.mesh];
  }

  for (auto& h : ejected) {
    ++counters_.delivered;
    emit(cycle, h.p.mesh, "eject", node_at(h.idx), h.p);
    if (client_) client_->eject(node_at(h.idx), std::move(h.p), cycle);
  }
  for (auto& h : egressed) {
    ++counters_.egressed;
    emit(cycle, h.p.mesh, "egress", node_at(h.idx), h.p);
    if (client_) client_->egress(node_at(h.idx), h.side, std::move(h.p), cycle);
  }
  for (auto& h : lost) {
    ++counters_.dropped;
    emit(cycle, h.p.mesh, "drop", node_at(h.idx), h.p);
    if (client_) client_->unroutable(node_at(h.idx), h.p, cycle);
  }
}

std::uint64_t Mesh::occupancy() const {
  std::uint64_t n = 0;
  for (const Router& r : routers_)
    for (const auto& mesh : r.in)
      for (const Input& in : mesh)
        n += in.count;
  return n;
}

std::uint64_t Mesh::link_bytes(NodeAddress from, Dir d) const {
  if (!contains(from) || d == Dir::Hub) return 0;
  return link_bytes_[index(from)][unsigned(d)];
}

std::uint64_t Mesh::link_packets(NodeAddress from, Dir d) const {
  if (!contains(from) || d == Dir::Hub) return 0;
  return link_packets_[index(from)][unsigned(d)];
}

std::uint64_t Mesh::cut_bytes(unsigned cut_col) const {
  std::uint64_t total = 0;
  if (cut_col <= origin_.col || cut_col >= origin_.col + cols_) return 0;
  for (unsigned row = origin_.row; row < origin_.row + rows_; ++row) {
    total += link_bytes({std::uint8_t(row), std::uint8_t(cut_col - 1)}, Dir::E);
    total += link_bytes({std::uint8_t(row), std::uint8_t(cut_col)}, Dir::W);
  }
  return total;
}

} // namespace epi
