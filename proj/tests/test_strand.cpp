#include <catch2/catch_amalgamated.hpp>

#include "spc/strand.hpp"
#include "support.hpp"

using namespace spc;
using namespace testsupport;

namespace {

Term atom(const char* name, Sort sort) { return Term::atom(name, sort); }

Protocol single_message() {
  Protocol p;
  p.name = "one";
  p.roles = {{"A", Sort::Role}, {"B", Sort::Role}};
  p.nonces = {{"Na", Sort::Nonce}};
  p.messages = {{{"A", Sort::Role}, {"B", Sort::Role}, atom("Na", Sort::Nonce)}};
  return p;
}

}  // namespace

TEST_CASE("woo_lam strand space", "[strand]") {
  Protocol wl = woo_lam();
  KStrandSpace space = to_strand_space(wl);

  REQUIRE(space.strands.size() == 3);
  CHECK(space.strands[0].participant.name == "A");
  CHECK(space.strands[1].participant.name == "B");
  CHECK(space.strands[2].participant.name == "S");

  // strand A: +A, -Nb, +{Nb}sk(Kas)
  const auto& a = space.strands[0].trace;
  REQUIRE(a.size() == 3);
  CHECK(a[0] == SignedTerm{Sign::Plus, atom("A", Sort::Role)});
  CHECK(a[1] == SignedTerm{Sign::Minus, atom("Nb", Sort::Nonce)});
  CHECK(a[2] == SignedTerm{Sign::Plus, Term::enc(atom("Nb", Sort::Nonce), Func::Sk,
                                                 atom("Kas", Sort::Key))});

  CHECK(space.strands[1].trace.size() == 5);
  CHECK(space.strands[2].trace.size() == 2);
  CHECK(space.cross_edges.size() == 5);
  CHECK(validate_space(space).empty());
}

TEST_CASE("single message and empty protocol", "[strand]") {
  SECTION("single message") {
    KStrandSpace space = to_strand_space(single_message());
    REQUIRE(space.strands.size() == 2);
    REQUIRE(space.strands[0].trace.size() == 1);
    CHECK(space.strands[0].trace[0].sign == Sign::Plus);
    REQUIRE(space.strands[1].trace.size() == 1);
    CHECK(space.strands[1].trace[0].sign == Sign::Minus);
    REQUIRE(space.cross_edges.size() == 1);
    CHECK(space.cross_edges[0].from == NodeRef{0, 1});
    CHECK(space.cross_edges[0].to == NodeRef{1, 1});
  }
  SECTION("empty protocol") {
    Protocol empty;
    KStrandSpace space = to_strand_space(empty);
    CHECK(space.strands.empty());
    CHECK(space.cross_edges.empty());
  }
}

TEST_CASE("sent_terms", "[strand]") {
  SECTION("empty space still contains the empty term") {
    CHECK(sent_terms(KStrandSpace{}) == std::set<Term>{Term::empty()});
  }
  SECTION("woo_lam yields five payloads plus empty") {
    CHECK(sent_terms(to_strand_space(woo_lam())).size() == 6);
  }
  SECTION("duplicate transmissions collapse") {
    Protocol p = single_message();
    p.messages.push_back({{"B", Sort::Role}, {"A", Sort::Role}, atom("Na", Sort::Nonce)});
    CHECK(sent_terms(to_strand_space(p)).size() == 2);  // Na and the empty term
  }
}

TEST_CASE("node accessors", "[strand]") {
  KStrandSpace space = to_strand_space(woo_lam());
  CHECK(node_term(space, NodeRef{0, 1}) == atom("A", Sort::Role));
  CHECK(node_sign(space, NodeRef{0, 2}) == Sign::Minus);
  CHECK_THROWS_AS(node_term(space, NodeRef{0, 4}), std::out_of_range);
  CHECK_THROWS_AS(node_term(space, NodeRef{9, 1}), std::out_of_range);
  CHECK_THROWS_AS(node_sign(space, NodeRef{0, 0}), std::out_of_range);
}

TEST_CASE("validate_space flags broken edges", "[strand]") {
  KStrandSpace space = to_strand_space(single_message());

  SECTION("well-formed") { CHECK(validate_space(space).empty()); }
  SECTION("edge between two positive nodes") {
    KStrandSpace bad = space;
    bad.strands[1].trace[0].sign = Sign::Plus;
    CHECK(validate_space(bad).size() == 1);
  }
  SECTION("edge with unequal payloads") {
    KStrandSpace bad = space;
    bad.strands[1].trace[0].payload = atom("Nb", Sort::Nonce);
    CHECK(validate_space(bad).size() == 1);
  }
  SECTION("edge out of range") {
    KStrandSpace bad = space;
    bad.cross_edges.push_back({NodeRef{0, 7}, NodeRef{1, 1}});
    CHECK(validate_space(bad).size() == 1);
  }
}

TEST_CASE("space shape and round trip", "[strand]") {
  for (const Protocol& p : {woo_lam(), lowe_yahalom()}) {
    KStrandSpace space = to_strand_space(p);
    std::size_t nodes = 0;
    for (const auto& s : space.strands) nodes += s.trace.size();
    CHECK(nodes == 2 * p.messages.size());
    CHECK(space.cross_edges.size() == p.messages.size());
    CHECK(messages_of_space(space) == p.messages);
    CHECK(sent_terms(space).count(Term::empty()) == 1);
  }
}

TEST_CASE("random protocols build well-formed spaces", "[strand]") {
  Rng rng(20240907);
  for (int round = 0; round < 200; ++round) {
    Protocol p = random_protocol(rng);
    KStrandSpace space = to_strand_space(p);
    CAPTURE(serialize_protocol(p));
    REQUIRE(validate_space(space).empty());
    REQUIRE(messages_of_space(space) == p.messages);
    std::size_t nodes = 0;
    for (const auto& s : space.strands) nodes += s.trace.size();
    REQUIRE(nodes == 2 * p.messages.size());
  }
}
