#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "cvae/datagen.hpp"
#include "cvae/errors.hpp"
#include "cvae/evalmetrics.hpp"
#include "cvae/rng.hpp"

using namespace cvae;

namespace {

DistanceMatrix random_distances(std::size_t n, Rng& rng) {
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, rng.uniform() * 10.0);
    return d;
}

CvaeModel trained_like_model(Variant variant, std::size_t D, std::size_t d, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, "init");
    return make_model(variant, Likelihood::Bernoulli, D, d, 6, 0.9, rng);
}

}  // namespace

TEST_SUITE("evalmetrics") {

TEST_CASE("distance matrix rejects negatives and keeps symmetry") {
    DistanceMatrix d(3);
    d.set(0, 1, 2.0);
    CHECK(d(1, 0) == 2.0);
    CHECK(d(2, 2) == 0.0);
    CHECK_THROWS_AS(d.set(0, 2, -0.5), InvalidInput);
}

TEST_CASE("model distances are symmetric and match the closed form") {
    CvaeModel m = trained_like_model(Variant::CvaeCorr, 6, 2, 1);
    Rng rng(2);
    DataMatrix data(5, std::vector<double>(6));
    for (auto& row : data)
        for (double& v : row) v = rng.uniform() < 0.5 ? 0.0 : 1.0;

    DistanceMatrix ind = distance_matrix(m, data, DistanceMode::Independent);
    DistanceMatrix corr = distance_matrix(m, data, DistanceMode::Correlated);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            CHECK(ind(i, j) == ind(j, i));
            DiagGaussian qi = encode(m, data[i]);
            DiagGaussian qj = encode(m, data[j]);
            CHECK(ind(i, j) == doctest::Approx(expected_sq_distance(qi, qj)).epsilon(1e-10));
            std::vector<double> rho = pair_correlation(m, data[i], data[j]);
            CHECK(corr(i, j) ==
                  doctest::Approx(std::max(0.0, expected_sq_distance(qi, qj, rho)))
                      .epsilon(1e-10));
        }
}

TEST_CASE("correlated distances need a pair net") {
    CvaeModel m = trained_like_model(Variant::Vae, 6, 2, 3);
    DataMatrix data(3, std::vector<double>(6, 1.0));
    CHECK_THROWS_AS(distance_matrix(m, data, DistanceMode::Correlated), InvalidInput);
}

TEST_CASE("matching RR is one when every dual is nearest") {
    DistanceMatrix d(4);
    d.set(0, 1, 0.1);
    d.set(2, 3, 0.2);
    d.set(0, 2, 5.0);
    d.set(0, 3, 6.0);
    d.set(1, 2, 7.0);
    d.set(1, 3, 8.0);
    EvalReport r = matching_rr(d, {1, 0, 3, 2});
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.per_item.size() == 4);
}

TEST_CASE("matching RR with one pair is trivially one") {
    DistanceMatrix d(2);
    d.set(0, 1, 42.0);
    CHECK(matching_rr(d, {1, 0}).value == doctest::Approx(1.0));
}

TEST_CASE("matching RR matches a brute-force ranking oracle") {
    Rng rng(5);
    DistanceMatrix d = random_distances(6, rng);
    std::vector<std::size_t> pairing = {3, 4, 5, 0, 1, 2};
    EvalReport r = matching_rr(d, pairing);
    double manual = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        std::size_t dual = pairing[i];
        std::size_t rank = 1;
        for (std::size_t k = 0; k < 6; ++k) {
            if (k == i || k == dual) continue;
            if (d(i, k) < d(i, dual) || (d(i, k) == d(i, dual) && k < dual)) ++rank;
        }
        manual += 1.0 / double(rank);
    }
    manual /= 6.0;
    CHECK(r.value == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("matching RR validates the pairing") {
    DistanceMatrix d(4);
    CHECK_THROWS_AS(matching_rr(d, {0, 1, 2, 3}), InvalidInput);       // fixed points
    CHECK_THROWS_AS(matching_rr(d, {1, 0, 3}), InvalidInput);          // wrong size
    CHECK_THROWS_AS(matching_rr(DistanceMatrix(0), {}), InvalidInput); // empty
}

TEST_CASE("spectral clustering separates two far blobs") {
    // vertices 0-3 close together, 4-7 close together, blobs far apart
    DistanceMatrix d(8);
    Rng rng(6);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i + 1; j < 8; ++j) {
            bool same = (i < 4) == (j < 4);
            d.set(i, j, same ? 0.2 + 0.05 * rng.uniform() : 30.0 + rng.uniform());
        }
    std::vector<int> got = spectral_cluster(d);
    std::vector<int> truth = {0, 0, 0, 0, 1, 1, 1, 1};
    CHECK(nmi(got, truth) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral clustering size guard") {
    CHECK_THROWS_AS(spectral_cluster(DistanceMatrix(3)), InvalidInput);
}

TEST_CASE("nmi basics") {
    std::vector<int> a = {0, 0, 1, 1};
    CHECK(nmi(a, a) == doctest::Approx(1.0));
    std::vector<int> complement = {1, 1, 0, 0};
    CHECK(nmi(a, complement) == doctest::Approx(1.0));
    std::vector<int> constant = {1, 1, 1, 1};
    CHECK(nmi(a, constant) == 0.0);
}

TEST_CASE("nmi of independent labelings is near zero") {
    Rng rng(7);
    std::vector<int> a(10000), b(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform() < 0.5 ? 0 : 1;
        b[i] = rng.uniform() < 0.5 ? 0 : 1;
    }
    CHECK(nmi(a, b) < 0.01);
}

TEST_CASE("ncrr is one for ideal rankings") {
    // star around 0; all test neighbors nearest
    DistanceMatrix d(5);
    d.set(0, 1, 1.0);
    d.set(0, 2, 2.0);
    d.set(0, 3, 9.0);
    d.set(0, 4, 9.5);
    for (std::size_t i = 1; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) d.set(i, j, 20.0);
    EvalReport r = ncrr(d, {{0, 3}, {0, 4}}, {{0, 1}, {0, 2}});
    // vertex 0: candidates are 1,2 (3,4 are train neighbors); both test edges
    // fill the two nearest slots
    CHECK(r.per_item[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ncrr worst case single edge") {
    DistanceMatrix d(4);
    d.set(0, 1, 1.0);
    d.set(0, 2, 2.0);
    d.set(0, 3, 3.0);
    d.set(1, 2, 5.0);
    d.set(1, 3, 5.0);
    d.set(2, 3, 5.0);
    EvalReport r = ncrr(d, {}, {{0, 3}});
    // vertex 0 has candidates 1,2,3 and its only test neighbor is farthest -> 1/3
    CHECK(r.per_item[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ncrr matches a brute-force oracle on a random instance") {
    Rng rng(8);
    const std::size_t n = 12;
    DistanceMatrix d = random_distances(n, rng);
    std::vector<Edge> train, test;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double u = rng.uniform();
            if (u < 0.2) train.emplace_back(i, j);
            else if (u < 0.35) test.emplace_back(i, j);
        }
    EvalReport r = ncrr(d, train, test);

    // independent brute-force implementation
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> test_nb, train_nb;
        for (const Edge& e : test)
            if (e.first == i || e.second == i) test_nb.push_back(e.first == i ? e.second : e.first);
        for (const Edge& e : train)
            if (e.first == i || e.second == i)
                train_nb.push_back(e.first == i ? e.second : e.first);
        if (test_nb.empty()) continue;
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            if (std::find(train_nb.begin(), train_nb.end(), k) != train_nb.end()) continue;
            candidates.push_back(k);
        }
        if (candidates.empty()) continue;
        double crr = 0.0;
        for (std::size_t j : test_nb) {
            std::size_t leq = 0;
            for (std::size_t k : candidates)
                if (d(i, k) <= d(i, j)) ++leq;
            crr += 1.0 / double(leq);
        }
        double ideal = 0.0;
        for (std::size_t r2 = 1; r2 <= std::min(test_nb.size(), candidates.size()); ++r2)
            ideal += 1.0 / double(r2);
        total += crr / ideal;
        ++counted;
    }
    CHECK(r.value == doctest::Approx(total / double(counted)).epsilon(1e-12));
}

TEST_CASE("ncrr rejects overlapping train and test sets") {
    DistanceMatrix d(4);
    d.set(0, 1, 1.0);
    CHECK_THROWS_AS(ncrr(d, {{0, 1}}, {{0, 1}}), InvalidInput);
}

TEST_CASE("rank metrics are invariant under monotone distance transforms") {
    Rng rng(9);
    DistanceMatrix d = random_distances(6, rng);
    DistanceMatrix squashed(6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) squashed.set(i, j, std::sqrt(d(i, j)) + 1e-3);
    std::vector<std::size_t> pairing = {1, 0, 3, 2, 5, 4};
    CHECK(matching_rr(d, pairing).value ==
          doctest::Approx(matching_rr(squashed, pairing).value).epsilon(1e-12));
    std::vector<Edge> train = {{0, 2}}, test = {{0, 1}, {3, 5}};
    CHECK(ncrr(d, train, test).value ==
          doctest::Approx(ncrr(squashed, train, test).value).epsilon(1e-12));
}

TEST_CASE("independent distances dominate correlated ones for positive rho") {
    CvaeModel m = trained_like_model(Variant::CvaeCorr, 6, 2, 10);
    // force the pair net to emit positive correlations
    m.pair_net.w2.assign(m.pair_net.w2.size(), 0.0);
    m.pair_net.b2.assign(m.pair_net.b2.size(), 1.0);
    Rng rng(11);
    DataMatrix data(4, std::vector<double>(6));
    for (auto& row : data)
        for (double& v : row) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    DistanceMatrix ind = distance_matrix(m, data, DistanceMode::Independent);
    DistanceMatrix corr = distance_matrix(m, data, DistanceMode::Correlated);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) CHECK(ind(i, j) >= corr(i, j) - 1e-12);
}

TEST_CASE("report json carries metric, value, per-item and config") {
    EvalReport r{"matching_rr", 0.5, {0.25, 0.75}};
    std::string j = report_to_json(r, "{\"task\":\"matching\"}");
    CHECK(j.find("\"metric\"") != std::string::npos);
    CHECK(j.find("\"per_item\"") != std::string::npos);
    CHECK(j.find("\"config\"") != std::string::npos);
}

}  // TEST_SUITE
