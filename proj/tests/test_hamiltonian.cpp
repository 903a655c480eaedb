#include "qlat/hamiltonian.hpp"

#include "qlat/capnet.hpp"
#include "qlat/errors.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>

using namespace qlat;
using capnet::CapacitanceNetwork;
using capnet::ChargingEnergyMatrix;
using capnet::NodeKind;
using hamiltonian::EffectiveHamiltonian;
using hamiltonian::ModeParams;

namespace {

ChargingEnergyMatrix diag_ec(std::initializer_list<double> values) {
    Matrix m(values.size(), values.size());
    std::size_t i = 0;
    for (const double v : values) {
        m(i, i) = v;
        ++i;
    }
    return ChargingEnergyMatrix{std::move(m), capnet::charging_scale_ghz_ff()};
}

CapacitanceNetwork qubit_pair() {
    return CapacitanceNetwork(
        {{0, NodeKind::Qubit, 100.0, 20.0}, {1, NodeKind::Qubit, 100.0, 20.0}}, {});
}

// Assemble an effective Hamiltonian directly from mode frequencies and
// couplings; used where the test fixes omega by hand.
EffectiveHamiltonian make_hamiltonian(const std::vector<ModeParams>& modes,
                                      const std::vector<std::vector<double>>& g) {
    const std::size_t n = modes.size();
    Matrix coupling(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) coupling(i, j) = g[i][j];
    }
    Matrix directed = coupling;
    EffectiveHamiltonian partial(modes, coupling, directed);
    return EffectiveHamiltonian(modes, coupling, hamiltonian::directed_coupling_matrix(partial));
}

ModeParams mode(int id, NodeKind kind, double freq) {
    ModeParams m;
    m.node_id = id;
    m.kind = kind;
    m.frequency_ghz = freq;
    m.anharmonicity_ghz = -0.2;
    m.charging_energy_ghz = 0.2;
    m.josephson_energy_ghz = 14.0;
    return m;
}

} // namespace

TEST_CASE("transmon closed forms: frequency and anharmonicity") {
    const auto ec = diag_ec({0.2, 0.2});
    const auto h = hamiltonian::build_effective_hamiltonian(ec, qubit_pair());
    REQUIRE(h.mode_count() == 2);
    // omega = sqrt(8 * 0.2 * 20) - 0.2 = sqrt(32) - 0.2
    CHECK(h.mode(0).frequency_ghz == doctest::Approx(std::sqrt(32.0) - 0.2).epsilon(1e-12));
    CHECK(h.mode(0).frequency_ghz == doctest::Approx(5.4569).epsilon(1e-4));
    CHECK(h.mode(0).anharmonicity_ghz == -0.2);
    CHECK(h.mode(0).frequency_ghz > 0.0);
}

TEST_CASE("zero charging off-diagonals decouple the modes") {
    const auto ec = diag_ec({0.2, 0.25});
    const auto h = hamiltonian::build_effective_hamiltonian(ec, qubit_pair());
    CHECK(h.coupling()(0, 1) == 0.0);
    CHECK(h.coupling()(1, 0) == 0.0);
    CHECK(h.coupling()(0, 0) == 0.0);
}

TEST_CASE("coupling from charging off-diagonals follows the zpf expansion") {
    Matrix m(2, 2);
    m(0, 0) = 0.2;
    m(1, 1) = 0.2;
    m(0, 1) = m(1, 0) = 1e-3;
    const ChargingEnergyMatrix ec{m, capnet::charging_scale_ghz_ff()};
    const auto h = hamiltonian::build_effective_hamiltonian(ec, qubit_pair());
    const double nzpf = std::pow(20.0 / (32.0 * 0.2), 0.25);
    CHECK(h.coupling()(0, 1) == doctest::Approx(8.0 * 1e-3 * nzpf * nzpf).epsilon(1e-12));
    CHECK(h.coupling()(0, 1) == h.coupling()(1, 0));   // identical modes: exact symmetry
}

TEST_CASE("transmon regime floor is enforced per node") {
    const auto ec = diag_ec({0.2, 0.2});
    const CapacitanceNetwork net(
        {{0, NodeKind::Qubit, 100.0, 20.0}, {1, NodeKind::Qubit, 100.0, 3.0}}, {});
    try {
        hamiltonian::build_effective_hamiltonian(ec, net);
        FAIL("expected regime violation");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("node 1") != std::string::npos);
    }
}

TEST_CASE("spectator nodes carry no mode") {
    const auto ec = diag_ec({0.2, 0.2, 0.3});
    const CapacitanceNetwork net({{0, NodeKind::Qubit, 100.0, 20.0},
                                  {1, NodeKind::Qubit, 100.0, 20.0},
                                  {2, NodeKind::Spectator, 50.0, {}}},
                                 {});
    const auto h = hamiltonian::build_effective_hamiltonian(ec, net);
    CHECK(h.mode_count() == 2);
    CHECK(h.coupling().rows() == 2);
}

TEST_CASE("mediated coupling arithmetic") {
    CHECK(hamiltonian::mediated_coupling(0.05, 0.05, 0.001, 1.0) ==
          doctest::Approx(0.0035).epsilon(1e-15));
    CHECK(hamiltonian::mediated_coupling(0.0, 0.08, 0.004, -1.3) == 0.004);
    const double g1 = 0.05, g2 = 0.06, delta = -1.2;
    CHECK(hamiltonian::mediated_coupling(g1, g2, -g1 * g2 / delta, delta) ==
          doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(hamiltonian::mediated_coupling(0.05, 0.05, 0.001, 0.0), ValidationError);
}

TEST_CASE("mediated coupling is linear in g12 and bilinear in g1, g2") {
    const double base = hamiltonian::mediated_coupling(0.04, 0.05, 0.002, -1.1);
    const double h = 1e-4;
    // Slope in g12 is exactly 1.
    CHECK((hamiltonian::mediated_coupling(0.04, 0.05, 0.002 + h, -1.1) - base) / h ==
          doctest::Approx(1.0).epsilon(1e-9));
    // Doubling g1 doubles the mediated part.
    const double mediated = base - 0.002;
    CHECK(hamiltonian::mediated_coupling(0.08, 0.05, 0.002, -1.1) - 0.002 ==
          doctest::Approx(2.0 * mediated).epsilon(1e-12));
    CHECK(hamiltonian::mediated_coupling(0.04, 0.10, 0.002, -1.1) - 0.002 ==
          doctest::Approx(2.0 * mediated).epsilon(1e-12));
}

TEST_CASE("directed coupling equals the symmetric coupling without couplers") {
    const auto h = make_hamiltonian(
        {mode(0, NodeKind::Qubit, 5.0), mode(1, NodeKind::Qubit, 5.3)},
        {{0.0, 0.004}, {0.004, 0.0}});
    CHECK(h.directed_coupling() == h.coupling());
}

TEST_CASE("directed coupling through one coupler matches the hand values") {
    const auto h = make_hamiltonian({mode(0, NodeKind::Qubit, 5.0),
                                     mode(1, NodeKind::Qubit, 5.3),
                                     mode(2, NodeKind::Coupler, 6.5)},
                                    {{0.0, 0.002, 0.08},
                                     {0.002, 0.0, 0.08},
                                     {0.08, 0.08, 0.0}});
    // g(0->1) = 0.002 + 0.0064 / (5.0 - 6.5), g(1->0) = 0.002 + 0.0064 / (5.3 - 6.5)
    CHECK(h.directed_coupling()(0, 1) == doctest::Approx(-0.00226666666667).epsilon(1e-9));
    CHECK(h.directed_coupling()(1, 0) == doctest::Approx(-0.00333333333333).epsilon(1e-9));
}

TEST_CASE("degenerate qubits through one coupler stay symmetric") {
    const auto h = make_hamiltonian({mode(0, NodeKind::Qubit, 5.0),
                                     mode(1, NodeKind::Qubit, 5.0),
                                     mode(2, NodeKind::Coupler, 6.5)},
                                    {{0.0, 0.002, 0.08},
                                     {0.002, 0.0, 0.08},
                                     {0.08, 0.08, 0.0}});
    CHECK(h.directed_coupling()(0, 1) == h.directed_coupling()(1, 0));
}

TEST_CASE("near-resonant mediated path raises a numeric error naming the pair") {
    const std::vector<ModeParams> modes{mode(0, NodeKind::Qubit, 6.4999995),
                                        mode(1, NodeKind::Qubit, 5.3),
                                        mode(2, NodeKind::Coupler, 6.5)};
    Matrix g(3, 3);
    g(0, 2) = g(2, 0) = 0.08;
    g(1, 2) = g(2, 1) = 0.08;
    g(0, 1) = g(1, 0) = 0.002;
    const EffectiveHamiltonian partial(modes, g, Matrix(3, 3));
    try {
        hamiltonian::directed_coupling_matrix(partial);
        FAIL("expected near-resonance error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("(0,2)") != std::string::npos);
    }
}

TEST_CASE("capacitance scaling moves couplings by the closed-form power") {
    // C -> s C gives E_C -> E_C / s and g -> g * s^(-1/2).
    const CapacitanceNetwork base({{0, NodeKind::Qubit, 100.0, 14.0},
                                   {1, NodeKind::Coupler, 60.0, 30.0},
                                   {2, NodeKind::Qubit, 104.0, 15.0}},
                                  {{{0, 1}, 4.0}, {{1, 2}, 3.5}, {{0, 2}, 0.4}});
    const auto h0 = hamiltonian::build_effective_hamiltonian(
        capnet::charging_energy_matrix(capnet::to_maxwell_matrix(base)), base);
    for (const double s : {0.5, 2.0}) {
        const CapacitanceNetwork scaled({{0, NodeKind::Qubit, 100.0 * s, 14.0},
                                         {1, NodeKind::Coupler, 60.0 * s, 30.0},
                                         {2, NodeKind::Qubit, 104.0 * s, 15.0}},
                                        {{{0, 1}, 4.0 * s}, {{1, 2}, 3.5 * s}, {{0, 2}, 0.4 * s}});
        const auto hs = hamiltonian::build_effective_hamiltonian(
            capnet::charging_energy_matrix(capnet::to_maxwell_matrix(scaled)), scaled);
        for (int i = 0; i < 3; ++i) {
            CHECK(hs.mode(i).charging_energy_ghz ==
                  doctest::Approx(h0.mode(i).charging_energy_ghz / s).epsilon(1e-9));
            for (int j = i + 1; j < 3; ++j) {
                CHECK(hs.coupling()(i, j) ==
                      doctest::Approx(h0.coupling()(i, j) * std::pow(s, -0.5)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("hamiltonian json dump carries modes and both coupling matrices") {
    const auto ec = diag_ec({0.2, 0.2});
    const auto h = hamiltonian::build_effective_hamiltonian(ec, qubit_pair());
    const auto j = hamiltonian::to_json(h);
    CHECK(j["modes"].size() == 2);
    CHECK(j["coupling_ghz"].size() == 2);
    CHECK(j["directed_coupling_ghz"].size() == 2);
    CHECK(j["modes"][0]["frequency_ghz"].get<double>() ==
          doctest::Approx(std::sqrt(32.0) - 0.2));
}

TEST_CASE("mismatched charging matrix dimension is rejected") {
    const auto ec = diag_ec({0.2, 0.2, 0.2});
    CHECK_THROWS_AS(hamiltonian::build_effective_hamiltonian(ec, qubit_pair()),
                    ValidationError);
}
