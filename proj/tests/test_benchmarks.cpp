#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "rankbo/benchmarks.hpp"
#include "rankbo/error.hpp"

using namespace rankbo;

namespace {

const std::string kFixtures = RANKBO_FIXTURES;

BoHistory history_from(const std::vector<double>& ys, std::size_t n_init) {
    BoHistory h;
    double best = -INFINITY;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        h.steps.push_back({k < n_init ? 0 : k - n_init + 1, k, {}, ys[k], 0.0});
        best = std::max(best, ys[k]);
        h.incumbent.push_back(best);
    }
    return h;
}

}  // namespace

TEST_CASE("sinusoid tasks") {
    CHECK(sinusoid(-std::numbers::pi, 0.0) == 0.0);
    CHECK(sinusoid(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(sinusoid(0.0, 0.0, 3.0) == doctest::Approx(3.0));
    const auto t = make_sinusoid_task(8.0);
    CHECK(t.id == "sin_b8");
    CHECK(t.size() == 201);
    CHECK(t.candidates(0, 0) == -10.0);
    CHECK(t.candidates(200, 0) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(t.oracle(37) == sinusoid(t.candidates(37, 0), 8.0));
    CHECK(make_sinusoid_task(1.5, -10, 10, 0.1, 2.0).id == "sin_b1.5_a2");
    CHECK(make_sinusoid_task(0.0, 0.0, 1.0, 0.25).size() == 5);
    for (int a = 11; a <= 15; ++a)
        for (int b = a + 1; b <= 15; ++b) CHECK(sinusoid(0.0, a) != doctest::Approx(sinusoid(0.0, b)));
    CHECK_THROWS_AS(make_sinusoid_task(0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(make_sinusoid_task(0.0, 0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(make_sinusoid_task(0.0, 0.0, 1.0, 5.0), DomainError);
}

TEST_CASE("to_meta_dataset") {
    const auto ds = to_meta_dataset("sin", {make_sinusoid_task(11), make_sinusoid_task(12)});
    CHECK(ds.tasks.size() == 2);
    CHECK(ds.dim() == 1);
    const auto& d = ds.tasks.at("sin_b11");
    CHECK(d.size() == 201);
    CHECK(d.x(0, 0) == -1.0);
    CHECK(d.y[5] == make_sinusoid_task(11).oracle(5));
    CHECK_THROWS_AS(to_meta_dataset("sin", {make_sinusoid_task(1), make_sinusoid_task(1)}), SchemaError);
}

TEST_CASE("meta-dataset JSON") {
    SUBCASE("single task, flat and nested y") {
        const auto flat = parse_meta_datasets(R"({"s": {"t": {"X": [[0.1], [0.2]], "y": [0.5, 0.9]}}})");
        const auto nested = parse_meta_datasets(R"({"s": {"t": {"X": [[0.1], [0.2]], "y": [[0.5], [0.9]]}}})");
        REQUIRE(flat.size() == 1);
        CHECK(flat.front().dim() == 1);
        CHECK(flat.front().tasks.at("t").size() == 2);
        CHECK(flat == nested);
    }
    SUBCASE("fixture with two search spaces") {
        const auto all = load_meta_datasets(kFixtures + "/two_spaces.json");
        REQUIRE(all.size() == 2);
        const auto a = load_meta_dataset(kFixtures + "/two_spaces.json", "space_a");
        CHECK(a.dim() == 2);
        CHECK(a.tasks.at("t2").y == std::vector<double>{1.5, 0.5, 2.5});
        CHECK(a.tasks.at("t1").x(1, 1) == 1.0);
        CHECK_THROWS_AS(load_meta_dataset(kFixtures + "/two_spaces.json"), SchemaError);
        CHECK_THROWS_AS(load_meta_dataset(kFixtures + "/two_spaces.json", "space_c"), SchemaError);
        CHECK_THROWS_AS(load_meta_dataset(kFixtures + "/missing.json"), IoError);
    }
    SUBCASE("dump and parse round-trip exactly") {
        const auto ds = to_meta_dataset("sin", {make_sinusoid_task(0.3), make_sinusoid_task(12.7)});
        const auto back = parse_meta_datasets(dump_meta_datasets({ds}));
        REQUIRE(back.size() == 1);
        CHECK(back.front() == ds);

        const auto path = (std::filesystem::temp_directory_path() / "rankbo_test_meta.json").string();
        save_meta_datasets(path, {ds});
        CHECK(load_meta_dataset(path) == ds);
        std::filesystem::remove(path);
    }
    SUBCASE("schema errors name the problem") {
        auto message = [](const std::string& text) {
            try {
                parse_meta_datasets(text);
            } catch (const SchemaError& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        CHECK(message(R"({"s": {"t": {"X": [[1.0], [2.0, 3.0]], "y": [1, 2]}}})").find("ragged") != std::string::npos);
        const auto mismatch = message(R"({"s": {"bad": {"X": [[1.0], [2.0], [3.0]], "y": [1, 2]}}})");
        CHECK(mismatch.find("'bad'") != std::string::npos);
        CHECK(mismatch.find("|y| = 2 but X has 3 rows") != std::string::npos);
        CHECK(!message(R"({"s": {"t": {"X": [[1.0]]}}})").empty());
        CHECK(!message(R"({"s": {"t": {"X": [["a"]], "y": [1]}}})").empty());
        CHECK(!message(R"({"s": {"t1": {"X": [[1.0]], "y": [1]}, "t2": {"X": [[1.0, 2.0]], "y": [1]}}})").empty());
        CHECK(!message("[1, 2]").empty());
        CHECK(!message("{not json").empty());
    }
}

TEST_CASE("incumbent_by_step") {
    const auto h = history_from({0.2, 0.5, 0.1, 0.3, 0.9}, 3);
    CHECK(incumbent_by_step(h) == std::vector<double>{0.5, 0.5, 0.9});
}

TEST_CASE("average_rank_metric") {
    SUBCASE("strictly better method and identical methods") {
        std::map<std::string, std::vector<BoHistory>> hs;
        hs["hi"] = {history_from({5.0, 6.0, 7.0}, 1)};
        hs["lo"] = {history_from({1.0, 2.0, 3.0}, 1)};
        const auto r = average_rank_metric(hs);
        CHECK(r.at("hi").values == std::vector<double>(3, 1.0));
        CHECK(r.at("lo").values == std::vector<double>(3, 2.0));
        hs["lo"] = hs["hi"];
        CHECK(average_rank_metric(hs).at("lo").values == std::vector<double>(3, 1.5));
        const std::map<std::string, std::vector<BoHistory>> single{{"only", {history_from({1.0, 0.0}, 1)}}};
        CHECK(average_rank_metric(single).at("only").values == std::vector<double>(2, 1.0));
    }
    SUBCASE("three methods over two cells") {
        std::map<std::string, std::vector<BoHistory>> hs;
        hs["a"] = {history_from({1.0, 4.0}, 1), history_from({2.0, 2.0}, 1)};
        hs["b"] = {history_from({2.0, 3.0}, 1), history_from({2.0, 5.0}, 1)};
        hs["c"] = {history_from({3.0, 3.0}, 1), history_from({1.0, 1.0}, 1)};
        const auto r = average_rank_metric(hs);
        // step 0: cell 1 ranks a3 b2 c1, cell 2 ranks a1.5 b1.5 c3.
        // step 1: cell 1 ranks a1 b2.5 c2.5, cell 2 ranks a2 b1 c3.
        CHECK(r.at("a").values == std::vector<double>{2.25, 1.5});
        CHECK(r.at("b").values == std::vector<double>{1.75, 1.75});
        CHECK(r.at("c").values == std::vector<double>{2.0, 2.75});
    }
    SUBCASE("hand example with a tie") {
        std::map<std::string, std::vector<BoHistory>> hs;
        hs["a"] = {history_from({1.0, 1.0}, 1)};
        hs["b"] = {history_from({2.0, 2.0}, 1)};
        hs["c"] = {history_from({2.0, 3.0}, 1)};
        const auto r = average_rank_metric(hs);
        CHECK(r.at("a").values == std::vector<double>{3.0, 3.0});
        CHECK(r.at("b").values == std::vector<double>{1.5, 2.0});
        CHECK(r.at("c").values == std::vector<double>{1.5, 1.0});
        CHECK(r.at("a").cells == 1);
    }
    SUBCASE("ranks at every step sum to M(M+1)/2") {
        std::map<std::string, std::vector<BoHistory>> hs;
        const std::vector<std::vector<double>> ys{{0.1, 0.4, 0.2, 0.8}, {0.3, 0.3, 0.9, 0.1}, {0.5, 0.2, 0.2, 0.2}, {0.1, 0.1, 0.1, 0.95}};
        for (std::size_t m = 0; m < 4; ++m)
            for (std::size_t c = 0; c < 3; ++c) {
                auto y = ys[m];
                std::rotate(y.begin(), y.begin() + c, y.end());
                hs["m" + std::to_string(m)].push_back(history_from(y, 2));
            }
        const auto r = average_rank_metric(hs);
        for (std::size_t t = 0; t < 3; ++t) {
            double total = 0.0;
            for (const auto& [name, curve] : r) total += curve.values[t];
            CHECK(total == doctest::Approx(10.0));
        }
    }
    SUBCASE("misaligned input") {
        std::map<std::string, std::vector<BoHistory>> hs;
        hs["a"] = {history_from({1.0, 2.0}, 1)};
        hs["b"] = {history_from({1.0, 2.0}, 1), history_from({1.0, 2.0}, 1)};
        CHECK_THROWS_AS(average_rank_metric(hs), AlignmentError);
        hs["b"] = {history_from({1.0, 2.0, 3.0}, 1)};
        CHECK_THROWS_AS(average_rank_metric(hs), AlignmentError);
        CHECK_THROWS_AS(average_rank_metric({}), AlignmentError);
    }
}

TEST_CASE("normalized_regret") {
    const auto h = history_from({0.0, 0.5, 1.0}, 1);
    CHECK(normalized_regret(h, -1.0, 1.0).values == std::vector<double>{0.5, 0.25, 0.0});
    CHECK(normalized_regret(h, 0.0, 1.0).values == std::vector<double>{1.0, 0.5, 0.0});
    CHECK_THROWS_AS(normalized_regret(h, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(normalized_regret(h, 0.0, 0.5), DomainError);
}

TEST_CASE("metric CSV writers") {
    std::ostringstream narrow;
    write_metric_csv(narrow, MetricCurve{"x", {1.5, 2.0}, 1});
    CHECK(narrow.str() == "step,value\n0,1.5\n1,2\n");
    std::ostringstream wide;
    write_wide_metric_csv(wide, {{"a", MetricCurve{"a", {1.0, 2.0}, 1}}, {"b", MetricCurve{"b", {2.0, 1.0}, 1}}});
    CHECK(wide.str() == "step,a,b\n0,1,2\n1,2,1\n");
}
