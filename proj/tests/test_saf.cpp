#include <doctest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "hypertest/decompose.hpp"
#include "hypertest/saf.hpp"

using namespace hypertest;

namespace {

GateCircuit single(SimpleKind k, bool tie_b = false) {
  GateCircuit g;
  BitId a = g.add_input("a");
  g.set_port("a", {a}, true);
  BitId b = 0;
  if (k != SimpleKind::Not) {
    b = tie_b ? g.tie(false, "k0") : g.add_input("b");
    if (!tie_b) g.set_port("b", {b}, true);
  }
  BitId y = g.add_gate(k, {a, b, 0}, "y");
  g.add_sink(y, SinkKind::Output, "y[0]");
  g.set_port("y", {y}, false);
  g.finalize();
  return g;
}

VectorProgram prog(std::vector<std::map<std::string, std::uint64_t>> rows) {
  VectorProgram p;
  p.name = "t";
  for (auto& r : rows) {
    VectorCycle c;
    for (auto& [k, v] : r) c.set.emplace_back(k, v);
    p.cycles.push_back(c);
  }
  return p;
}

std::size_t find_fault(const GateCircuit& g, const std::vector<Saf>& f, const std::string& name) {
  for (std::size_t k = 0; k < f.size(); ++k)
    if (saf_name(g, f[k]) == name) return k;
  FAIL("no fault " << name);
  return 0;
}

// Detection of one fault in one frame by the scalar reference evaluator.
bool naive_detects(const GateCircuit& g, const Saf& f, const std::vector<bool>& frame) {
  StuckFault sf{f.loc, f.value};
  return testutil::naive_sinks(g, frame) != testutil::naive_sinks(g, frame, &sf);
}

}  // namespace

TEST_CASE("stuck-at fault enumeration and collapsing") {
  SUBCASE("NOT: 4 faults collapse to 2") {
    GateCircuit g = single(SimpleKind::Not);
    CHECK(enumerate_safs(g, false).size() == 4);
    CHECK(enumerate_safs(g, true).size() == 2);
  }
  SUBCASE("AND2: 6 faults collapse to 4") {
    GateCircuit g = single(SimpleKind::And2);
    CHECK(enumerate_safs(g, false).size() == 6);
    CHECK(enumerate_safs(g, true).size() == 4);
  }
  SUBCASE("OR2: 6 faults collapse to 4") {
    CHECK(enumerate_safs(single(SimpleKind::Or2), true).size() == 4);
  }
  SUBCASE("a wire has two faults") {
    GateCircuit g;
    BitId a = g.add_input("a");
    g.set_port("a", {a}, true);
    g.add_sink(a, SinkKind::Output, "y[0]");
    g.set_port("y", {a}, false);
    g.finalize();
    CHECK(enumerate_safs(g, false).size() == 2);
    CHECK(enumerate_safs(g, true).size() == 2);
  }
  SUBCASE("fanout branches are separate locations") {
    GateCircuit g;
    BitId a = g.add_input("a");
    BitId b = g.add_input("b");
    BitId x = g.add_gate(SimpleKind::Xor2, {a, b, 0}, "x");
    BitId y = g.add_gate(SimpleKind::And2, {x, a, 0}, "y");
    g.add_sink(y, SinkKind::Output, "y[0]");
    g.add_sink(x, SinkKind::Output, "x[0]");
    g.finalize();
    // a and x: stem + 2 branches each; b and y: stem only
    CHECK(fault_locations(g).size() == 8);
    CHECK(enumerate_safs(g, false).size() == 16);
  }
}

TEST_CASE("stuck-at fault simulation") {
  SUBCASE("NOT with both values reaches 100%") {
    GateCircuit g = single(SimpleKind::Not);
    SafCoverage cov = saf_fault_sim(g, {prog({{{"a", 0}}, {{"a", 1}}})});
    CHECK(cov.count(Testability::Testable) == 2);
    CHECK(cov.coverage() == Rational(1));
    CHECK(cov.missed().empty());
  }
  SUBCASE("one value covers half of NOT") {
    GateCircuit g = single(SimpleKind::Not);
    SafCoverage cov = saf_fault_sim(g, {prog({{{"a", 0}}})});
    CHECK(cov.coverage() == Rational(1, 2));
  }
  SUBCASE("AND with a constant-0 input has an untestable fault") {
    GateCircuit g = single(SimpleKind::And2, true);
    auto faults = enumerate_safs(g, true);
    auto st = classify_testable(g, faults);
    CHECK(st[find_fault(g, faults, "a/1")] == Testability::Untestable);
    CHECK(st[find_fault(g, faults, "k0/1")] == Testability::Testable);
    SafCoverage cov = saf_fault_sim(g, {prog({{{"a", 1}}})});
    CHECK(cov.count(Testability::Untestable) >= 1);
    CHECK(cov.coverage() == Rational(1));
  }
  SUBCASE("empty test set detects nothing") {
    GateCircuit g = single(SimpleKind::And2);
    SafCoverage cov = saf_fault_sim(g, {});
    CHECK(cov.detected.none());
    CHECK(cov.coverage() == Rational(0));
  }
  SUBCASE("unknown input port is a diagnostic") {
    GateCircuit g = single(SimpleKind::Not);
    CHECK_THROWS_AS(gate_frames(g, prog({{{"q", 0}}})), DiagnosticError);
  }
}

TEST_CASE("fault simulation agrees with a scalar reference") {
  for (const char* name : {"counter", "decoder", "dup2po"}) {
    Circuit c = testutil::load(name);
    for (bool dup : {false, true})
      for (Decomp d : {Decomp::A, Decomp::B}) {
        CAPTURE(name);
        CAPTURE(dup);
        GateCircuit g = expand(c, ExpandOptions{d, dup});
        auto faults = enumerate_safs(g, false);
        FrameSet frames = gate_frames(g, testutil::random_program(c, 24, 7));
        Bitset got = saf_detect(g, faults, frames);
        for (std::size_t k = 0; k < faults.size(); ++k) {
          bool want = false;
          for (std::size_t t = 0; t < frames.size() && !want; ++t) want = naive_detects(g, faults[k], frames.frame(t));
          CAPTURE(saf_name(g, faults[k]));
          CHECK(got.test(k) == want);
        }
      }
  }
}

TEST_CASE("collapsed classes are detection-equivalent") {
  for (const char* name : {"counter", "alu8"}) {
    Circuit c = testutil::load(name);
    GateCircuit g = expand(c, Decomp::B);
    auto faults = enumerate_safs(g, false);
    FrameSet frames = gate_frames(g, testutil::random_program(c, 40, 3));
    for (std::size_t t = 0; t < frames.size(); ++t) {
      FrameSet one(frames.sources());
      one.push(frames.frame(t));
      Bitset det = saf_detect(g, faults, one);
      std::map<std::uint32_t, bool> by_class;
      for (std::size_t k = 0; k < faults.size(); ++k) {
        auto [it, fresh] = by_class.emplace(faults[k].cls, det.test(k));
        if (!fresh && it->second != det.test(k)) {
          CAPTURE(name);
          CAPTURE(saf_name(g, faults[k]));
          FAIL("class members disagree");
        }
      }
    }
  }
}

TEST_CASE("threaded fault simulation matches serial") {
  Circuit c = testutil::load("alu8");
  for (Decomp d : {Decomp::A, Decomp::B}) {
    GateCircuit g = expand(c, d);
    std::vector<VectorProgram> tests = {testutil::random_program(c, 30, 1, "a"), testutil::random_program(c, 10, 2, "b")};
    SafCoverage s = saf_fault_sim(g, tests, 1);
    SafCoverage p = saf_fault_sim(g, tests, 4);
    CHECK(s.detected == p.detected);
    REQUIRE(s.tests.size() == p.tests.size());
    for (std::size_t k = 0; k < s.tests.size(); ++k) CHECK(s.tests[k].detected == p.tests[k].detected);
  }
}

TEST_CASE("testability classification") {
  SUBCASE("agrees with the scalar reference on small netlists") {
    Circuit c = testutil::load("dup2po");
    GateCircuit g = expand(c, ExpandOptions{Decomp::B, true});
    auto faults = enumerate_safs(g, true);
    auto st = classify_testable(g, faults);
    const std::size_t n = g.sources().size();
    REQUIRE(n <= 12);
    for (std::size_t k = 0; k < faults.size(); ++k) {
      bool want = false;
      for (std::uint64_t a = 0; a < (std::uint64_t{1} << n) && !want; ++a)
        want = naive_detects(g, faults[k], assignment_bits(a, n));
      CHECK(st[k] == (want ? Testability::Testable : Testability::Untestable));
    }
  }
  SUBCASE("too many sources is unclassified") {
    Circuit c = testutil::load("alu8");
    GateCircuit g = expand(c, Decomp::A);
    auto faults = enumerate_safs(g, true);
    CHECK(classify_testable(g, faults[0], 4) == Testability::Unclassified);
  }
}

TEST_CASE("alu8 fault universe") {
  Circuit c = testutil::load("alu8");
  for (Decomp d : {Decomp::A, Decomp::B}) {
    GateCircuit g = expand(c, d);
    auto faults = enumerate_safs(g, true);
    auto st = classify_testable(g, faults);
    std::size_t testable = 0, untestable = 0;
    for (auto s : st) (s == Testability::Testable ? testable : untestable)++;
    CAPTURE(decomp_name(d));
    if (d == Decomp::A) {
      CHECK(faults.size() == 606);
      CHECK(testable == 578);
      CHECK(untestable == 28);
    } else {
      CHECK(faults.size() == 614);
      CHECK(testable == 601);
      CHECK(untestable == 13);
    }
  }
}

TEST_CASE("tcpn") {
  CHECK(compute_tcpn(100, 200).tcpn == Rational(1, 2));
  CHECK(compute_tcpn(100, 200).tcpn.decimal() == "0.5");
  CHECK(compute_tcpn(0, 17).tcpn == Rational(0));
  CHECK(compute_tcpn(3, 9).tcpn.str() == "1/3");
  CHECK_THROWS(compute_tcpn(1, 0));
  GateCircuit g = single(SimpleKind::And2);
  TcpnReport r = compute_tcpn({prog({{{"a", 0}}, {{"a", 1}}}), prog({{{"b", 1}}})}, g);
  CHECK(r.cycles == 3);
  CHECK(r.nets == g.nets().size());
  CHECK(r.tcpn == Rational(3, static_cast<std::int64_t>(g.nets().size())));
  CHECK(compute_tcpn({}, g).tcpn == Rational(0));
}
