#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_set>

#include "qrt/gates.hpp"
#include "qrt/stab.hpp"

using namespace qrt;
using namespace qrt::stab;
using qla::CMatrix;
using qla::cplx;

namespace {

CMatrix pauli(int which) {
    switch (which) {
        case 1: return gates::pauli_x();
        case 2: return gates::pauli_y();
        case 3: return gates::pauli_z();
        default: return CMatrix::identity(2);
    }
}

CMatrix pauli_string(int n, int code) {
    CMatrix m = pauli(code % 4);
    code /= 4;
    for (int q = 1; q < n; ++q) {
        m = qla::kron(pauli(code % 4), m);
        code /= 4;
    }
    return m;
}

int stabilizer_group_size(const std::vector<cplx>& psi, int n) {
    int count = 0;
    const int npaulis = 1 << (2 * n);
    for (int code = 0; code < npaulis; ++code) {
        CMatrix p = pauli_string(n, code);
        for (double sign : {1.0, -1.0}) {
            auto out = p * psi;
            double dist = 0;
            for (size_t i = 0; i < psi.size(); ++i) dist += std::norm(sign * out[i] - psi[i]);
            if (dist < 1e-18) ++count;
        }
    }
    return count;
}

// gate on chosen qubits, identity elsewhere (qubit 0 is the leftmost factor)
CMatrix embed_gate(const CMatrix& g, int n, int q0) {
    CMatrix m = CMatrix::identity(1);
    int gate_qubits = (g.rows() == 2 ? 1 : 2);
    for (int q = 0; q < n;) {
        if (q == q0) {
            m = qla::kron(m, g);
            q += gate_qubits;
        } else {
            m = qla::kron(m, CMatrix::identity(2));
            q += 1;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("vertex counts match the closed-form formula") {
    CHECK(expected_count(1) == 6);
    CHECK(expected_count(2) == 60);
    CHECK(expected_count(3) == 1080);
    CHECK(expected_count(4) == 36720);
    for (int n = 1; n <= 3; ++n) {
        auto poly = enumerate(n);
        CHECK(long(poly.vertices.size()) == expected_count(n));
    }
    CHECK_THROWS(enumerate(5));
    CHECK_THROWS(enumerate(0));
}

TEST_CASE("single-qubit polytope is the six Pauli eigenstates") {
    auto poly = enumerate(1);
    REQUIRE(poly.vertices.size() == 6);
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<std::vector<cplx>> expect = {
        {1, 0}, {0, 1}, {s, s}, {s, -s}, {s, cplx(0, 1) * s}, {s, cplx(0, -1) * s}};
    std::unordered_set<std::string> enumerated;
    for (const auto& v : poly.vertices) enumerated.insert(fingerprint(v.amplitudes));
    for (const auto& e : expect) CHECK(enumerated.count(fingerprint(e)) == 1);
}

TEST_CASE("two-qubit polytope matches stabilizer-group enumeration") {
    // independent oracle: every pair of commuting independent signed Paulis
    // fixes one stabilizer state; collect the distinct projectors
    std::unordered_set<std::string> oracle;
    const int n = 2;
    for (int c1 = 1; c1 < 16; ++c1)
        for (int c2 = 1; c2 < 16; ++c2) {
            if (c1 == c2) continue;
            CMatrix p1 = pauli_string(n, c1), p2 = pauli_string(n, c2);
            if ((p1 * p2 - p2 * p1).frobenius_norm() > 1e-12) continue;
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0}) {
                    CMatrix pi1 = cplx(0.5) * (CMatrix::identity(4) + cplx(s1) * p1);
                    CMatrix pi2 = cplx(0.5) * (CMatrix::identity(4) + cplx(s2) * p2);
                    CMatrix proj = pi1 * pi2;
                    if (std::abs(proj.trace().real() - 1.0) > 1e-9) continue;
                    auto eig = qla::eig_hermitian(qla::Hermitian(proj, 1e-9));
                    std::vector<cplx> psi(4);
                    for (int i = 0; i < 4; ++i) psi[i] = eig.vectors(i, 3);
                    oracle.insert(fingerprint(psi));
                }
        }
    CHECK(oracle.size() == 60);

    auto poly = enumerate(2);
    std::unordered_set<std::string> enumerated;
    for (const auto& v : poly.vertices) enumerated.insert(fingerprint(v.amplitudes));
    CHECK(enumerated == oracle);
}

TEST_CASE("every vertex is fixed by a maximal abelian Pauli subgroup") {
    for (int n : {1, 2}) {
        auto poly = enumerate(n);
        for (const auto& v : poly.vertices)
            REQUIRE(stabilizer_group_size(v.amplitudes, n) == (1 << n));
    }
    // sampled for n = 3
    auto poly3 = enumerate(3);
    std::mt19937_64 eng(5);
    std::uniform_int_distribution<size_t> pick(0, poly3.vertices.size() - 1);
    for (int trial = 0; trial < 25; ++trial) {
        const auto& v = poly3.vertices[pick(eng)];
        REQUIRE(stabilizer_group_size(v.amplitudes, 3) == 8);
    }
}

TEST_CASE("clifford generators permute the vertex set") {
    std::mt19937_64 eng(17);
    for (int n : {1, 2, 3}) {
        auto poly = enumerate(n);
        std::unordered_set<std::string> members;
        for (const auto& v : poly.vertices) members.insert(fingerprint(v.amplitudes));

        std::vector<CMatrix> generators;
        for (int q = 0; q < n; ++q) {
            generators.push_back(embed_gate(gates::hadamard(), n, q));
            generators.push_back(embed_gate(gates::phase_s(), n, q));
        }
        for (int q = 0; q + 1 < n; ++q) generators.push_back(embed_gate(gates::cnot(), n, q));

        std::uniform_int_distribution<size_t> pick(0, poly.vertices.size() - 1);
        std::uniform_int_distribution<size_t> pickg(0, generators.size() - 1);
        const int trials = (n == 3 ? 400 : 300);
        for (int t = 0; t < trials; ++t) {
            const auto& v = poly.vertices[pick(eng)];
            auto image = generators[pickg(eng)] * v.amplitudes;
            CHECK(members.count(fingerprint(image)) == 1);
        }
    }
}

TEST_CASE("stabilizer fidelity") {
    auto poly1 = enumerate(1);
    CHECK(stabilizer_fidelity(gates::ket(0, 2), poly1) == Catch::Approx(1.0).margin(1e-12));

    // T|+>
    auto tstate = gates::phase_t() * gates::plus_state(1);
    CHECK(stabilizer_fidelity(tstate, poly1) ==
          Catch::Approx((2.0 + std::sqrt(2.0)) / 4.0).margin(1e-9));

    auto poly3 = enumerate(3);
    auto cczstate = gates::ccz() * gates::plus_state(3);
    CHECK(stabilizer_fidelity(cczstate, poly3) == Catch::Approx(9.0 / 16.0).margin(1e-9));

    SECTION("vertices have fidelity one") {
        std::mt19937_64 eng(3);
        std::uniform_int_distribution<size_t> pick(0, poly3.vertices.size() - 1);
        for (int t = 0; t < 20; ++t) {
            const auto& v = poly3.vertices[pick(eng)];
            CHECK(stabilizer_fidelity(v.amplitudes, poly3) == Catch::Approx(1.0).margin(1e-9));
        }
    }

    SECTION("multiplicativity at two copies of the T state") {
        auto poly2 = enumerate(2);
        std::vector<cplx> tt(4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) tt[i * 2 + j] = tstate[i] * tstate[j];
        double f1 = stabilizer_fidelity(tstate, poly1);
        CHECK(stabilizer_fidelity(tt, poly2) == Catch::Approx(f1 * f1).margin(1e-9));
    }

    CHECK_THROWS(stabilizer_fidelity(gates::ket(0, 4), poly1));
}

TEST_CASE("cache round trip") {
    auto dir = std::filesystem::temp_directory_path() / "qrt_stab_cache_test";
    std::filesystem::remove_all(dir);
    auto fresh = enumerate(2, dir.string());
    REQUIRE(std::filesystem::exists(dir / "stabpoly_n2.txt"));
    auto cached = enumerate(2, dir.string());
    REQUIRE(cached.vertices.size() == fresh.vertices.size());
    std::unordered_set<std::string> a, b;
    for (const auto& v : fresh.vertices) a.insert(fingerprint(v.amplitudes));
    for (const auto& v : cached.vertices) b.insert(fingerprint(v.amplitudes));
    CHECK(a == b);

    SECTION("stale cache is regenerated") {
        std::ofstream bad(dir / "stabpoly_n2.txt");
        bad << "stabpoly-cache v0\n";
        bad.close();
        auto regen = enumerate(2, dir.string());
        CHECK(regen.vertices.size() == 60);
    }
    std::filesystem::remove_all(dir);
}
