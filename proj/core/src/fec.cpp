#include "mcquic/fec.hpp"

#include <algorithm>
#include <cassert>
#include <mutex>
#include <set>
#include <stdexcept>

#include "mcquic/gf256.hpp"

namespace mcquic {

std::vector<std::vector<uint8_t>> build_systematic_vandermonde(size_t k,
                                                               size_t r) {
  if (k == 0) throw std::invalid_argument("vandermonde: k == 0");
  if (k + r > kFecCapacity)
    throw std::invalid_argument("vandermonde: k + r exceeds GF(256) capacity");

  // (k+r) x k Vandermonde on evaluation points 0..k+r-1.
  size_t n = k + r;
  std::vector<std::vector<uint8_t>> m(n, std::vector<uint8_t>(k));
  for (size_t i = 0; i < n; ++i) {
    uint8_t x = uint8_t(i);
    uint8_t p = 1;
    for (size_t j = 0; j < k; ++j) {
      m[i][j] = p;
      p = gf256::mul(p, x);
    }
  }

  // Column-reduce so the top k x k block becomes the identity. Right-
  // multiplying by an invertible matrix preserves the any-k-rows
  // independence of the Vandermonde construction.
  for (size_t col = 0; col < k; ++col) {
    size_t pivot = col;
    while (pivot < k && m[col][pivot] == 0) ++pivot;
    assert(pivot < k);  // top block of a Vandermonde matrix is invertible
    if (pivot != col) {
      for (size_t i = 0; i < n; ++i) std::swap(m[i][col], m[i][pivot]);
    }
    uint8_t scale = gf256::inv(m[col][col]);
    for (size_t i = 0; i < n; ++i) m[i][col] = gf256::mul(m[i][col], scale);
    for (size_t other = 0; other < k; ++other) {
      if (other == col) continue;
      uint8_t f = m[col][other];
      if (f == 0) continue;
      for (size_t i = 0; i < n; ++i) {
        m[i][other] ^= gf256::mul(m[i][col], f);
      }
    }
  }
  return {m.begin() + k, m.end()};
}

const std::vector<uint8_t>& repair_coefficients(size_t k,
                                                size_t repair_index) {
  // Cache full repair-row blocks per k; a source reuses a handful of
  // window sizes many times.
  static std::mutex mu;
  static std::map<size_t, std::vector<std::vector<uint8_t>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  size_t r_max = kFecCapacity - k;
  if (repair_index >= r_max)
    throw std::invalid_argument("repair_coefficients: index exhausted");
  auto it = cache.find(k);
  if (it == cache.end()) {
    it = cache.emplace(k, build_systematic_vandermonde(k, r_max)).first;
  }
  return it->second[repair_index];
}

std::optional<uint64_t> FecWindow::map_frame(ByteSpan frame_bytes) {
  if (full()) return std::nullopt;
  uint64_t ssid = next_ssid();
  symbols_.emplace_back(frame_bytes.begin(), frame_bytes.end());
  return ssid;
}

void FecWindow::expire_up_to(uint64_t up_to_ssid) {
  if (up_to_ssid + 1 <= first_ssid_) return;
  uint64_t drop = std::min<uint64_t>(up_to_ssid + 1 - first_ssid_,
                                     symbols_.size());
  symbols_.erase(symbols_.begin(), symbols_.begin() + drop);
  first_ssid_ += drop;
  if (first_ssid_ < up_to_ssid + 1) first_ssid_ = up_to_ssid + 1;
}

const Bytes& FecWindow::symbol(uint64_t ssid) const {
  assert(ssid >= first_ssid_ && ssid < next_ssid());
  return symbols_[size_t(ssid - first_ssid_)];
}

namespace {

// Symbols enter equations as [len_hi len_lo payload 0...] vectors;
// zero extension keeps a symbol's vector consistent across windows of
// different widths.
Bytes padded_symbol(const Bytes& payload, size_t width) {
  Bytes out(width, 0);
  out[0] = uint8_t(payload.size() >> 8);
  out[1] = uint8_t(payload.size());
  std::copy(payload.begin(), payload.end(), out.begin() + 2);
  return out;
}

std::optional<Bytes> unpad_symbol(const Bytes& padded) {
  if (padded.size() < 2) return std::nullopt;
  size_t len = size_t(padded[0]) << 8 | padded[1];
  if (len + 2 > padded.size()) return std::nullopt;  // corrupt solution
  return Bytes(padded.begin() + 2, padded.begin() + 2 + len);
}

}  // namespace

std::optional<RepairSymbol> generate_repair(const FecWindow& window,
                                            uint64_t repair_index) {
  size_t k = window.size();
  if (k == 0) return std::nullopt;
  if (k + repair_index >= kFecCapacity) return std::nullopt;
  size_t width = 2;
  for (uint64_t s = window.first_ssid(); s < window.next_ssid(); ++s) {
    width = std::max(width, window.symbol(s).size() + 2);
  }
  const auto& coef = repair_coefficients(k, size_t(repair_index));
  RepairSymbol out;
  out.first_ssid = window.first_ssid();
  out.window_count = k;
  out.repair_index = repair_index;
  out.payload.assign(width, 0);
  for (size_t j = 0; j < k; ++j) {
    Bytes padded = padded_symbol(window.symbol(window.first_ssid() + j), width);
    gf256::mul_add(out.payload.data(), padded.data(), width, coef[j]);
  }
  return out;
}

namespace {

struct Equation {
  std::map<uint64_t, uint8_t> unknown_coef;  // ssid -> coefficient
  Bytes rhs;
  bool dead = false;  // consumed or found inconsistent
};

// Eliminates known symbols from the equation's RHS.
void substitute(Equation& eq, uint64_t ssid, const Bytes& padded_value) {
  auto it = eq.unknown_coef.find(ssid);
  if (it == eq.unknown_coef.end()) return;
  size_t n = std::min(eq.rhs.size(), padded_value.size());
  gf256::mul_add(eq.rhs.data(), padded_value.data(), n, it->second);
  eq.unknown_coef.erase(it);
}

}  // namespace

std::vector<SourceSymbol> recover(const std::map<uint64_t, Bytes>& received,
                                  const std::vector<RepairSymbol>& repairs) {
  std::vector<Equation> eqs;
  eqs.reserve(repairs.size());
  std::map<uint64_t, Bytes> solved_padded;  // newly solved, padded form

  auto known_padded = [&](uint64_t ssid,
                          size_t width) -> std::optional<Bytes> {
    auto r = received.find(ssid);
    if (r != received.end()) return padded_symbol(r->second, width);
    auto s = solved_padded.find(ssid);
    if (s != solved_padded.end()) {
      Bytes out = s->second;
      out.resize(width, 0);
      return out;
    }
    return std::nullopt;
  };

  for (const auto& rep : repairs) {
    if (rep.window_count == 0 || rep.payload.size() < 2) continue;
    Equation eq;
    eq.rhs = rep.payload;
    bool bad = false;
    std::vector<uint8_t> coef;
    try {
      coef = repair_coefficients(size_t(rep.window_count),
                                 size_t(rep.repair_index));
    } catch (const std::invalid_argument&) {
      continue;  // out-of-capacity metadata: unusable equation
    }
    for (size_t j = 0; j < rep.window_count && !bad; ++j) {
      uint64_t ssid = rep.first_ssid + j;
      if (auto padded = known_padded(ssid, eq.rhs.size())) {
        gf256::mul_add(eq.rhs.data(), padded->data(), eq.rhs.size(), coef[j]);
      } else if (coef[j] != 0) {
        eq.unknown_coef[ssid] = coef[j];
      }
    }
    if (!bad) eqs.push_back(std::move(eq));
  }

  std::vector<SourceSymbol> out;
  bool progress = true;
  while (progress) {
    progress = false;

    // Propagate solved symbols into remaining equations.
    for (auto& eq : eqs) {
      if (eq.dead) continue;
      std::vector<uint64_t> to_sub;
      for (const auto& [ssid, c] : eq.unknown_coef) {
        if (solved_padded.count(ssid)) to_sub.push_back(ssid);
      }
      for (uint64_t ssid : to_sub) {
        Bytes padded = solved_padded[ssid];
        padded.resize(eq.rhs.size(), 0);
        substitute(eq, ssid, padded);
      }
    }

    // Single-unknown equations solve directly.
    for (auto& eq : eqs) {
      if (eq.dead) continue;
      if (eq.unknown_coef.empty()) {
        eq.dead = true;  // fully determined; consistency not enforced
        continue;
      }
      if (eq.unknown_coef.size() == 1) {
        auto [ssid, c] = *eq.unknown_coef.begin();
        if (c == 0) {
          eq.dead = true;
          continue;
        }
        Bytes padded(eq.rhs.size());
        uint8_t ic = gf256::inv(c);
        for (size_t i = 0; i < padded.size(); ++i) {
          padded[i] = gf256::mul(eq.rhs[i], ic);
        }
        eq.dead = true;
        if (auto payload = unpad_symbol(padded)) {
          solved_padded[ssid] = std::move(padded);
          out.push_back({ssid, std::move(*payload)});
          progress = true;
        }
        continue;
      }
    }
    if (progress) continue;

    // Joint elimination among equations sharing their unknown set.
    std::map<std::vector<uint64_t>, std::vector<size_t>> groups;
    for (size_t i = 0; i < eqs.size(); ++i) {
      if (eqs[i].dead || eqs[i].unknown_coef.empty()) continue;
      std::vector<uint64_t> key;
      for (const auto& [ssid, c] : eqs[i].unknown_coef) key.push_back(ssid);
      groups[key].push_back(i);
    }
    for (auto& [unknowns, members] : groups) {
      size_t u = unknowns.size();
      if (members.size() < u) continue;
      size_t width = 0;
      for (size_t idx : members) {
        width = std::max(width, eqs[idx].rhs.size());
      }
      // Dense elimination over the group's first u usable equations.
      std::vector<std::vector<uint8_t>> a;
      std::vector<Bytes> b;
      for (size_t idx : members) {
        std::vector<uint8_t> row(u);
        for (size_t j = 0; j < u; ++j) {
          row[j] = eqs[idx].unknown_coef[unknowns[j]];
        }
        Bytes rhs = eqs[idx].rhs;
        rhs.resize(width, 0);
        a.push_back(std::move(row));
        b.push_back(std::move(rhs));
      }
      size_t rank = 0;
      for (size_t col = 0; col < u && rank < a.size(); ++col) {
        size_t pivot = rank;
        while (pivot < a.size() && a[pivot][col] == 0) ++pivot;
        if (pivot == a.size()) continue;
        std::swap(a[rank], a[pivot]);
        std::swap(b[rank], b[pivot]);
        uint8_t ic = gf256::inv(a[rank][col]);
        for (size_t j = 0; j < u; ++j) a[rank][j] = gf256::mul(a[rank][j], ic);
        for (size_t i = 0; i < b[rank].size(); ++i) {
          b[rank][i] = gf256::mul(b[rank][i], ic);
        }
        for (size_t other = 0; other < a.size(); ++other) {
          if (other == rank) continue;
          uint8_t f = a[other][col];
          if (f == 0) continue;
          for (size_t j = 0; j < u; ++j) {
            a[other][j] ^= gf256::mul(a[rank][j], f);
          }
          gf256::mul_add(b[other].data(), b[rank].data(),
                         std::min(b[other].size(), b[rank].size()), f);
        }
        ++rank;
      }
      // Rows reduced to a single unit coefficient are solutions; solved
      // unknowns drain the source equations via substitution on the
      // next pass, so nothing is marked dead here.
      for (size_t i = 0; i < a.size(); ++i) {
        size_t nonzero = 0;
        size_t col = 0;
        for (size_t j = 0; j < u; ++j) {
          if (a[i][j] != 0) {
            ++nonzero;
            col = j;
          }
        }
        if (nonzero != 1 || a[i][col] != 1) continue;
        uint64_t ssid = unknowns[col];
        if (solved_padded.count(ssid)) continue;
        if (auto payload = unpad_symbol(b[i])) {
          solved_padded[ssid] = b[i];
          out.push_back({ssid, std::move(*payload)});
          progress = true;
        }
      }
    }
  }

  std::sort(out.begin(), out.end(),
            [](const SourceSymbol& x, const SourceSymbol& y) {
              return x.ssid < y.ssid;
            });
  return out;
}

RepairScheduler::NackResult RepairScheduler::on_nack(const PnRangeSet& ranges,
                                                     uint64_t p_max,
                                                     const SentLog& sent_log) {
  NackResult res;
  for (const auto& r : ranges.ranges()) {
    for (uint64_t pn = r.lo; pn <= r.hi; ++pn) {
      auto it = sent_log.find(pn);
      if (it == sent_log.end()) {
        ++res.unknown_pns;  // expired or never sent: ignored per-PN
        continue;
      }
      if (it->second.carries_reliable) ++res.reliable_lost;
    }
  }
  for (const auto& [pn, t] : sent_repairs_) {
    if (pn > p_max) ++res.repairs_unseen;
  }
  uint64_t local = res.reliable_lost > res.repairs_unseen
                       ? res.reliable_lost - res.repairs_unseen
                       : 0;
  nb_to_send_ = std::max(nb_to_send_, literal_ ? res.reliable_lost : local);
  return res;
}

void RepairScheduler::on_repair_sent(uint64_t pn, int64_t now_ns) {
  assert(nb_to_send_ > 0);
  --nb_to_send_;
  ++sent_this_round_;
  sent_repairs_.emplace_back(pn, now_ns);
}

void RepairScheduler::expire_up_to(uint64_t up_to_pn) {
  std::erase_if(sent_repairs_,
                [&](const auto& e) { return e.first <= up_to_pn; });
}

}  // namespace mcquic
