#include "qrt/stab.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace qrt::stab {

using qla::cplx;

long expected_count(int n) {
    long c = 1L << n;
    for (int k = 1; k <= n; ++k) c *= (1L << k) + 1;
    return c;
}

qla::Hermitian StabilizerState::projector() const {
    const int d = int(amplitudes.size());
    qla::CMatrix p(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p(i, j) = amplitudes[i] * std::conj(amplitudes[j]);
    return qla::Hermitian(p, 1e-9);
}

namespace {

const cplx kPhases[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

void build_amplitudes(StabilizerState& s) {
    const int dim = 1 << s.n;
    s.amplitudes.assign(dim, cplx(0.0));
    const double mag = 1.0 / std::pow(2.0, 0.5 * s.k);
    const int points = 1 << s.k;
    for (int y = 0; y < points; ++y) {
        std::uint32_t x = s.shift;
        int e = 0;
        for (int a = 0; a < s.k; ++a) {
            if (!(y >> a & 1)) continue;
            x ^= s.basis[a];
            e += s.linear_phase[a];
            for (int b = a + 1; b < s.k; ++b)
                if (y >> b & 1) e += 2 * s.quad_phase[size_t(a) * s.k + b];
        }
        s.amplitudes[x] = mag * kPhases[e & 3];
    }
}

// all RREF bases with the given pivot columns; appends one state per
// combination of free entries, shift, and phase data
template <typename Fn>
void for_each_rref(int n, int k, const std::vector<int>& pivots, Fn&& emit) {
    // free positions: row a may have arbitrary bits in non-pivot columns > pivot[a]
    std::vector<std::pair<int, int>> free_pos;  // (row, column)
    std::vector<bool> is_pivot(n, false);
    for (int p : pivots) is_pivot[p] = true;
    for (int a = 0; a < k; ++a)
        for (int c = pivots[a] + 1; c < n; ++c)
            if (!is_pivot[c]) free_pos.emplace_back(a, c);
    const long combos = 1L << free_pos.size();
    for (long f = 0; f < combos; ++f) {
        std::vector<std::uint32_t> rows(k, 0);
        for (int a = 0; a < k; ++a) rows[a] = 1u << pivots[a];
        for (size_t t = 0; t < free_pos.size(); ++t)
            if (f >> t & 1) rows[free_pos[t].first] |= 1u << free_pos[t].second;
        emit(rows, is_pivot);
    }
}

std::string cache_path(const std::string& dir, int n) {
    return dir + "/stabpoly_n" + std::to_string(n) + ".txt";
}

constexpr const char* kCacheTag = "stabpoly-cache v1";

bool load_cache(const std::string& path, int n, StabilizerPolytope& poly) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line) || line != kCacheTag) return false;
    int fn = 0;
    long count = 0;
    in >> fn >> count;
    if (fn != n || count != expected_count(n)) return false;
    poly.n = n;
    poly.vertices.clear();
    poly.vertices.reserve(count);
    for (long i = 0; i < count; ++i) {
        StabilizerState s;
        s.n = n;
        in >> s.k;
        s.basis.resize(s.k);
        for (auto& b : s.basis) in >> b;
        in >> s.shift;
        s.linear_phase.resize(s.k);
        for (auto& c : s.linear_phase) in >> c;
        s.quad_phase.assign(size_t(s.k) * s.k, 0);
        for (int a = 0; a < s.k; ++a)
            for (int b = a + 1; b < s.k; ++b) {
                int q;
                in >> q;
                s.quad_phase[size_t(a) * s.k + b] = std::uint8_t(q);
            }
        if (!in) return false;
        build_amplitudes(s);
        poly.vertices.push_back(std::move(s));
    }
    return true;
}

void save_cache(const std::string& path, const StabilizerPolytope& poly) {
    std::ofstream out(path);
    if (!out) return;
    out << kCacheTag << "\n" << poly.n << " " << poly.vertices.size() << "\n";
    for (const auto& s : poly.vertices) {
        out << s.k;
        for (auto b : s.basis) out << " " << b;
        out << " " << s.shift;
        for (auto c : s.linear_phase) out << " " << c;
        for (int a = 0; a < s.k; ++a)
            for (int b = a + 1; b < s.k; ++b)
                out << " " << int(s.quad_phase[size_t(a) * s.k + b]);
        out << "\n";
    }
}

}  // namespace

std::string fingerprint(const std::vector<cplx>& amplitudes) {
    // global-phase canonicalization: first nonzero amplitude made positive real
    cplx phase(1, 0);
    for (const auto& a : amplitudes)
        if (std::abs(a) > 1e-9) {
            phase = std::conj(a) / std::abs(a);
            break;
        }
    std::string out;
    out.reserve(amplitudes.size() * 2 * 16);
    char buf[64];
    for (const auto& a : amplitudes) {
        cplx v = a * phase;
        double re = std::round(v.real() * 1e12) / 1e12 + 0.0;
        double im = std::round(v.imag() * 1e12) / 1e12 + 0.0;
        std::snprintf(buf, sizeof buf, "%.12f,%.12f;", re, im);
        out += buf;
    }
    return out;
}

StabilizerPolytope enumerate(int n, const std::string& cache_dir) {
    if (n < 1 || n > 4) throw dimension_error("stab::enumerate: n must be in 1..4");

    if (!cache_dir.empty()) {
        StabilizerPolytope cached;
        if (load_cache(cache_path(cache_dir, n), n, cached)) return cached;
    }

    StabilizerPolytope poly;
    poly.n = n;
    poly.vertices.reserve(expected_count(n));

    for (int k = 0; k <= n; ++k) {
        // pivot column subsets, ascending
        std::vector<int> pivots(k);
        std::function<void(int, int)> choose = [&](int start, int depth) {
            if (depth == k) {
                for_each_rref(n, k, pivots,
                              [&](const std::vector<std::uint32_t>& rows,
                                  const std::vector<bool>& is_pivot) {
                    // shifts supported outside pivot columns
                    std::vector<int> freecols;
                    for (int c = 0; c < n; ++c)
                        if (!is_pivot[c]) freecols.push_back(c);
                    const long shifts = 1L << freecols.size();
                    const long lin = 1L << (2 * k);
                    const long quad = 1L << (k * (k - 1) / 2);
                    for (long sh = 0; sh < shifts; ++sh) {
                        std::uint32_t t = 0;
                        for (size_t c = 0; c < freecols.size(); ++c)
                            if (sh >> c & 1) t |= 1u << freecols[c];
                        for (long cl = 0; cl < lin; ++cl)
                            for (long qm = 0; qm < quad; ++qm) {
                                StabilizerState s;
                                s.n = n;
                                s.k = k;
                                s.basis = rows;
                                s.shift = t;
                                s.linear_phase.resize(k);
                                for (int a = 0; a < k; ++a)
                                    s.linear_phase[a] = int(cl >> (2 * a) & 3);
                                s.quad_phase.assign(size_t(k) * k, 0);
                                int bit = 0;
                                for (int a = 0; a < k; ++a)
                                    for (int b = a + 1; b < k; ++b)
                                        s.quad_phase[size_t(a) * k + b] =
                                            std::uint8_t(qm >> bit++ & 1);
                                build_amplitudes(s);
                                poly.vertices.push_back(std::move(s));
                            }
                    }
                });
                return;
            }
            for (int c = start; c < n; ++c) {
                pivots[depth] = c;
                choose(c + 1, depth + 1);
            }
        };
        choose(0, 0);
    }

    if (long(poly.vertices.size()) != expected_count(n))
        throw numerical_error("stab::enumerate: vertex count mismatch");

    // the parameterization generates each state exactly once; confirm
    std::unordered_set<std::string> seen;
    seen.reserve(poly.vertices.size() * 2);
    for (const auto& s : poly.vertices)
        if (!seen.insert(fingerprint(s.amplitudes)).second)
            throw numerical_error("stab::enumerate: duplicate state generated");

    if (!cache_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cache_dir, ec);
        if (!ec) save_cache(cache_path(cache_dir, n), poly);
    }
    return poly;
}

double stabilizer_fidelity(const std::vector<cplx>& phi, const StabilizerPolytope& poly) {
    if (int(phi.size()) != (1 << poly.n))
        throw dimension_error("stabilizer_fidelity: dimension mismatch");
    double best = 0;
    for (const auto& s : poly.vertices) {
        cplx ov = 0;
        for (size_t i = 0; i < phi.size(); ++i) ov += std::conj(s.amplitudes[i]) * phi[i];
        best = std::max(best, std::norm(ov));
    }
    return best;
}

}  // namespace qrt::stab
