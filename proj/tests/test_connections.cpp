#include <catch2/catch_amalgamated.hpp>

#include "spc/connections.hpp"
#include "support.hpp"

using namespace spc;
using namespace testsupport;

namespace {

Term wl_inner() {
  return Term::enc(Term::atom("Nb", Sort::Nonce), Func::Sk, Term::atom("Kas", Sort::Key));
}

Term wl_msg4() {
  return Term::enc(Term::pair(Term::atom("A", Sort::Role), wl_inner()), Func::Sk,
                   Term::atom("Kbs", Sort::Key));
}

}  // namespace

TEST_CASE("woo_lam has exactly one complete connection", "[connections]") {
  KStrandSpace space = to_strand_space(woo_lam());
  auto complete = complete_connections(space);

  REQUIRE(complete.size() == 1);
  const Connection& c = *complete.begin();
  CHECK(c.kind == ConnectionKind::Complete);
  CHECK(c.pre.term == wl_inner());
  CHECK(c.post.term == wl_msg4());
  // pre end: A's transmission of message 3; post end: B's transmission of message 4
  CHECK(cstrand(c.pre, space).participant.name == "A");
  CHECK(c.pre.node == NodeRef{0, 3});
  CHECK(cstrand(c.post, space).participant.name == "B");
  CHECK(c.post.node == NodeRef{1, 4});
  CHECK(node_sign(space, c.pre.node) == Sign::Plus);
  CHECK(node_sign(space, c.post.node) == Sign::Plus);
}

TEST_CASE("lowe_yahalom has no complete connections", "[connections]") {
  CHECK(complete_connections(to_strand_space(lowe_yahalom())).empty());
}

TEST_CASE("woo_lam partial connections include the nonce challenge", "[connections]") {
  KStrandSpace space = to_strand_space(woo_lam());
  auto partials = partial_connections(space);

  Connection expected{ConnectionKind::Partial,
                      {NodeRef{1, 2}, Term::atom("Nb", Sort::Nonce)},
                      {NodeRef{0, 3}, wl_inner()}};
  CHECK(partials.count(expected) == 1);

  SECTION("every partial has its plain end inside its encrypted end") {
    for (const auto& c : partials) {
      CHECK_FALSE(c.pre.term.is_enc());
      CHECK(c.post.term.is_enc());
      CHECK(subterm(c.pre.term, c.post.term));
      CHECK_FALSE(c.pre.term == c.post.term);
    }
  }
}

TEST_CASE("plaintext-only protocols yield no connections", "[connections]") {
  auto r = parse_protocol(
      "protocol plain\nroles A, B\nnonces Na, Nb\n"
      "1. A -> B : Na\n2. B -> A : Nb, Na\n");
  REQUIRE(r.ok());
  KStrandSpace space = to_strand_space(*r.protocol);
  CHECK(partial_connections(space).empty());
  CHECK(complete_connections(space).empty());
}

TEST_CASE("a single encrypted message connects to nothing", "[connections]") {
  auto r = parse_protocol(
      "protocol single\nroles A, B\nnonces Na\nkeys K\n"
      "1. A -> B : {Na}sk(K)\n");
  REQUIRE(r.ok());
  KStrandSpace space = to_strand_space(*r.protocol);
  CHECK(partial_connections(space).empty());
  CHECK(complete_connections(space).empty());
}

TEST_CASE("no connection relates a term to itself at one node", "[connections]") {
  for (const Protocol& p : {woo_lam(), lowe_yahalom()}) {
    KStrandSpace space = to_strand_space(p);
    for (const auto& c : security_property(space).connections) {
      CHECK_FALSE((c.pre.node == c.post.node && c.pre.term == c.post.term));
      CHECK(subterm(c.pre.term, node_term(space, c.pre.node)));
      CHECK(subterm(c.post.term, node_term(space, c.post.node)));
    }
  }
}

TEST_CASE("security property is the union of both extractors", "[connections]") {
  KStrandSpace space = to_strand_space(woo_lam());
  auto xi = security_property(space);
  auto partials = partial_connections(space);
  auto completes = complete_connections(space);
  CHECK(xi.connections.size() == partials.size() + completes.size());
  CHECK(xi.count(ConnectionKind::Partial) == partials.size());
  CHECK(xi.count(ConnectionKind::Complete) == completes.size());
  CHECK(security_property(KStrandSpace{}).connections.empty());
}

TEST_CASE("extraction matches the brute-force oracle", "[connections][oracle]") {
  SECTION("corpus spaces") {
    for (const Protocol& p : {woo_lam(), lowe_yahalom()}) {
      KStrandSpace space = to_strand_space(p);
      CHECK(partial_connections(space) == oracle_connections(space, ConnectionKind::Partial));
      CHECK(complete_connections(space) == oracle_connections(space, ConnectionKind::Complete));
    }
  }
  SECTION("random spaces") {
    Rng rng(20240902);
    for (int round = 0; round < 60; ++round) {
      KStrandSpace space;
      std::size_t strands = 2 + rng.below(2);
      for (std::size_t s = 0; s < strands; ++s) {
        KStrand st = random_strand(rng, 4);
        st.participant.name = "P" + std::to_string(s);
        space.strands.push_back(std::move(st));
      }
      CHECK(partial_connections(space) == oracle_connections(space, ConnectionKind::Partial));
      CHECK(complete_connections(space) == oracle_connections(space, ConnectionKind::Complete));
    }
  }
}

TEST_CASE("connections are stable under consistent renaming", "[connections]") {
  Protocol p = woo_lam();
  Atom old{"Nb", Sort::Nonce};
  Atom fresh{"Nz", Sort::Nonce};
  Protocol q = rename_protocol_atom(p, old, fresh);

  auto before = security_property(to_strand_space(p)).connections;
  auto after = security_property(to_strand_space(q)).connections;
  REQUIRE(before.size() == after.size());

  std::set<Connection> mapped;
  for (auto c : before) {
    c.pre.term = rename_atom(c.pre.term, old, fresh);
    c.post.term = rename_atom(c.post.term, old, fresh);
    mapped.insert(c);
  }
  CHECK(mapped == after);
}
