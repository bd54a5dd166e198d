#pragma once

// Parallel composition candidates: every interleaving of two message
// sequences in which any step may also fuse one message from each side into
// a concatenated message. Candidates are lattice paths over an m x n grid
// with unit, unit and diagonal steps, enumerated lazily in lexicographic
// order (Take1 < Take2 < Concat at every branch point).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

struct Step {
  enum class Kind : std::uint8_t { Take1, Take2, Concat };
  Kind kind{Kind::Take1};
  std::size_t i{0};  // 1-based index into the first protocol's messages
  std::size_t j{0};  // 1-based index into the second protocol's messages

  friend bool operator==(const Step&, const Step&) = default;
  friend auto operator<=>(const Step&, const Step&) = default;

  std::string str() const {
    switch (kind) {
      case Kind::Take1: return "T1(" + std::to_string(i) + ")";
      case Kind::Take2: return "T2(" + std::to_string(j) + ")";
      case Kind::Concat: return "C(" + std::to_string(i) + "," + std::to_string(j) + ")";
    }
    return "?";
  }
};

struct GeneratedCandidate {
  std::vector<Step> steps;
  std::uint64_t index{0};  // position in the emission order

  friend bool operator==(const GeneratedCandidate&, const GeneratedCandidate&) = default;

  std::size_t concat_count() const {
    std::size_t n = 0;
    for (const auto& s : steps)
      if (s.kind == Step::Kind::Concat) ++n;
    return n;
  }
};

/// Number of candidates for message counts (m, n) without materializing
/// them: D(m,n) = D(m-1,n) + D(m,n-1) + D(m-1,n-1) with unit boundaries.
inline std::uint64_t count_generated(std::size_t m, std::size_t n) {
  std::vector<std::uint64_t> row(n + 1, 1);
  for (std::size_t a = 1; a <= m; ++a) {
    std::uint64_t diag = row[0];  // D(a-1, b-1)
    for (std::size_t b = 1; b <= n; ++b) {
      std::uint64_t up = row[b];
      row[b] = row[b] + row[b - 1] + diag;
      diag = up;
    }
  }
  return row[n];
}

/// Depth-first lazy enumerator over the step lattice.
class CandidateStream {
 public:
  CandidateStream(std::size_t m, std::size_t n) : m_(m), n_(n) {
    stack_.push_back({0, 0, 0, false});
  }

  std::optional<GeneratedCandidate> next() {
    while (!stack_.empty()) {
      Frame& f = stack_.back();
      if (f.i == m_ && f.j == n_ && !f.emitted) {
        f.emitted = true;
        return GeneratedCandidate{path_, emitted_++};
      }
      bool descended = false;
      while (f.branch < 3) {
        int b = f.branch++;
        if (b == 0 && f.i < m_) {
          path_.push_back({Step::Kind::Take1, f.i + 1, 0});
          Frame child{f.i + 1, f.j, 0, false};
          stack_.push_back(child);
          descended = true;
          break;
        }
        if (b == 1 && f.j < n_) {
          path_.push_back({Step::Kind::Take2, 0, f.j + 1});
          Frame child{f.i, f.j + 1, 0, false};
          stack_.push_back(child);
          descended = true;
          break;
        }
        if (b == 2 && f.i < m_ && f.j < n_) {
          path_.push_back({Step::Kind::Concat, f.i + 1, f.j + 1});
          Frame child{f.i + 1, f.j + 1, 0, false};
          stack_.push_back(child);
          descended = true;
          break;
        }
      }
      if (!descended) {
        stack_.pop_back();
        if (!stack_.empty()) path_.pop_back();  // root frame carries no step
      }
    }
    return std::nullopt;
  }

 private:
  struct Frame {
    std::size_t i, j;
    int branch;  // next alternative to try
    bool emitted;
  };

  std::size_t m_, n_;
  std::vector<Frame> stack_;
  std::vector<Step> path_;
  std::uint64_t emitted_{0};
};

inline CandidateStream generate(const Protocol& p1, const Protocol& p2) {
  return CandidateStream(p1.messages.size(), p2.messages.size());
}

/// A concatenated message only makes sense when both halves travel between
/// the same two participants.
inline bool endpoints_compatible(const GeneratedCandidate& c, const Protocol& p1,
                                 const Protocol& p2) {
  for (const auto& s : c.steps) {
    if (s.kind != Step::Kind::Concat) continue;
    const auto& m1 = p1.messages.at(s.i - 1);
    const auto& m2 = p2.messages.at(s.j - 1);
    if (!(m1.sender == m2.sender) || !(m1.receiver == m2.receiver)) return false;
  }
  return true;
}

inline std::vector<GeneratedCandidate> filter_endpoints(std::vector<GeneratedCandidate> candidates,
                                                        const Protocol& p1, const Protocol& p2) {
  std::vector<GeneratedCandidate> out;
  for (auto& c : candidates)
    if (endpoints_compatible(c, p1, p2)) out.push_back(std::move(c));
  return out;
}

/// Declarations merged across both protocols; throws when a shared name is
/// declared at different sorts.
inline Protocol merge_declarations(const Protocol& p1, const Protocol& p2) {
  Protocol out;
  out.name = p1.name + "_" + p2.name;

  auto merge_atoms = [](std::vector<Atom>& dst, const std::vector<Atom>& src) {
    for (const auto& a : src) {
      bool present = false;
      for (const auto& d : dst)
        if (d == a) present = true;
      if (!present) dst.push_back(a);
    }
  };
  out.roles = p1.roles;
  merge_atoms(out.roles, p2.roles);
  out.nonces = p1.nonces;
  merge_atoms(out.nonces, p2.nonces);
  out.keys = p1.keys;
  merge_atoms(out.keys, p2.keys);

  for (const auto& a : out.declared_atoms()) {
    auto s1 = p1.find_atom(a.name);
    auto s2 = p2.find_atom(a.name);
    if (s1 && s2 && s1->sort != s2->sort)
      throw std::invalid_argument("atom '" + a.name + "' declared at conflicting sorts");
  }

  out.keypairs = p1.keypairs;
  for (const auto& kp : p2.keypairs) {
    bool present = false;
    for (const auto& existing : out.keypairs)
      if (existing == kp) present = true;
    if (!present) out.keypairs.push_back(kp);
  }

  out.knowledge = p1.knowledge;
  for (const auto& [role, terms] : p2.knowledge) {
    auto& dst = out.knowledge[role];
    for (const auto& t : terms) {
      bool present = false;
      for (const auto& d : dst)
        if (d == t) present = true;
      if (!present) dst.push_back(t);
    }
  }

  out.secrets = p1.secrets;
  for (const auto& s : p2.secrets) {
    bool present = false;
    for (const auto& d : out.secrets)
      if (d == s) present = true;
    if (!present) out.secrets.push_back(s);
  }
  return out;
}

/// Materializes a candidate as a protocol. Take steps copy the original
/// message; a Concat step pairs the two payloads without any rewriting.
inline Protocol realize(const GeneratedCandidate& c, const Protocol& p1, const Protocol& p2) {
  if (!endpoints_compatible(c, p1, p2))
    throw std::invalid_argument("realize: candidate has endpoint-incompatible concat steps");
  Protocol out = merge_declarations(p1, p2);
  out.name += "_" + std::to_string(c.index);
  for (const auto& s : c.steps) {
    switch (s.kind) {
      case Step::Kind::Take1:
        out.messages.push_back(p1.messages.at(s.i - 1));
        break;
      case Step::Kind::Take2:
        out.messages.push_back(p2.messages.at(s.j - 1));
        break;
      case Step::Kind::Concat: {
        const auto& m1 = p1.messages.at(s.i - 1);
        const auto& m2 = p2.messages.at(s.j - 1);
        out.messages.push_back({m1.sender, m1.receiver, Term::pair(m1.payload, m2.payload)});
        break;
      }
    }
  }
  return out;
}

}  // namespace spc
