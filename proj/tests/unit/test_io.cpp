#include <gtest/gtest.h>

#include <sstream>

#include "covertq/errors.hpp"
#include "covertq/io.hpp"

using namespace covertq;

TEST(Io, DistributionLiterals) {
    EXPECT_TRUE(io::parse_dist(R"({"kind":"exp","rate":1.0})").is_exponential());
    const auto h = io::parse_dist(R"({"kind":"hyperexp","branches":[[0.5,1.0],[0.5,2.0]]})");
    ASSERT_TRUE(h.is_hyperexp());
    EXPECT_NEAR(h.mean(), 0.75, 1e-15);
    const auto e = io::parse_dist(R"({"kind":"erlang","stages":2,"rate":2.0})");
    ASSERT_TRUE(e.is_erlang());
    EXPECT_DOUBLE_EQ(e.mean(), 1.0);
}

TEST(Io, BadLiteralsAreInvalidConfig) {
    EXPECT_THROW(io::parse_dist(R"({"kind":"weibull"})"), InvalidConfig);
    EXPECT_THROW(io::parse_dist(R"({"kind":"exp"})"), InvalidConfig);
    EXPECT_THROW(io::parse_dist(R"({"kind":"exp","rate":-2})"), InvalidConfig);
    EXPECT_THROW(io::parse_dist(R"({"kind":"exp","rate":"fast"})"), InvalidConfig);
    EXPECT_THROW(io::parse_dist(R"({"kind":"hyperexp","branches":[[1.0]]})"), InvalidConfig);
    EXPECT_THROW(io::parse_dist("{not json"), InvalidConfig);
}

TEST(Io, Config) {
    const auto sp = io::parse_config(
        R"({"lambda":0.5,"g1":{"kind":"exp","rate":1},"g2":{"kind":"erlang","stages":2,"rate":2}})");
    EXPECT_DOUBLE_EQ(sp.lambda, 0.5);
    EXPECT_TRUE(sp.g2.is_erlang());
    EXPECT_THROW(io::parse_config(R"({"lambda":0.5,"g1":{"kind":"exp","rate":1}})"), InvalidConfig);
    EXPECT_THROW(io::parse_config(R"({"lambda":2,"g1":{"kind":"exp","rate":1},"g2":{"kind":"exp","rate":1}})"),
                 StabilityError);
}

TEST(Io, PolicyAndDetector) {
    const auto p = io::parse_policy(R"({"kind":"iia","q":0.2,"batch":[0,1]})");
    EXPECT_EQ(p.kind, Policy::Kind::IIA);
    EXPECT_DOUBLE_EQ(p.q, 0.2);
    EXPECT_DOUBLE_EQ(p.batch.mean(), 1.0);
    EXPECT_EQ(io::parse_policy(R"({"kind":"iia_geometric","q":0.1,"a":0.5})").a, 0.5);
    EXPECT_THROW(io::parse_policy(R"({"kind":"iia","q":0.2,"batch":[0.5,0.6]})"), InvalidConfig);
    EXPECT_THROW(io::parse_policy(R"({"kind":"sometimes"})"), InvalidConfig);

    const auto d = io::parse_detector(R"({"statistic":"IIA_RandomJob","q":0.2,"batch":[0,1],"pi_j":0.5})");
    EXPECT_EQ(d.statistic, Statistic::IIA_RandomJob);
    EXPECT_DOUBLE_EQ(*d.pi_j, 0.5);
    EXPECT_THROW(io::parse_detector(R"({"statistic":"GLRT"})"), InvalidConfig);
}

TEST(Io, MatchedDetector) {
    EXPECT_EQ(io::matched_detector(Policy::iebp(0.1)).statistic, Statistic::YV);
    EXPECT_EQ(io::matched_detector(Policy::ii(0.1)).statistic, Statistic::II_YV);
    const auto d = io::matched_detector(Policy::iia(0.1, BatchPMF::point(2)));
    EXPECT_EQ(d.statistic, Statistic::IIA_RandomJob);
    EXPECT_DOUBLE_EQ(d.batch->mean(), 2.0);
    EXPECT_DOUBLE_EQ(*io::matched_detector(Policy::iia_geometric(0.1, 0.5)).geometric_a, 0.5);
}

TEST(Io, Scaling) {
    const auto c = io::parse_scaling(R"({"phi":{"kind":"power","gamma":0.25},"delta":0.1,"n_grid":[100,1000]})");
    EXPECT_EQ(c.scaling.phi.kind, Phi::Kind::Power);
    EXPECT_DOUBLE_EQ(c.scaling.phi.gamma, 0.25);
    EXPECT_EQ(c.scaling.n_grid.size(), 2u);
    EXPECT_EQ(c.scaling.trials_per_point, 400u);
    EXPECT_EQ(c.policy.kind, Policy::Kind::IEBP);
    EXPECT_EQ(c.detector.statistic, Statistic::YV);
    EXPECT_EQ(io::parse_scaling(R"({"phi":"sqrt_nlogn"})").scaling.phi.kind, Phi::Kind::SqrtNLogN);
    EXPECT_THROW(io::parse_scaling(R"({"phi":"cubic"})"), InvalidConfig);
    EXPECT_THROW(io::parse_scaling(R"({"n_grid":[100,50]})"), InvalidConfig);
    EXPECT_THROW(io::parse_scaling(R"({"delta":1.5})"), InvalidConfig);
}

TEST(Io, TraceRoundTrip) {
    const auto sp = io::parse_config(R"({"lambda":0.5,"g1":{"kind":"exp","rate":1},"g2":{"kind":"exp","rate":1}})");
    const auto r = run(sp, Policy::iebp(0.5), 200, 3);
    std::stringstream ss;
    for (std::size_t i = 0; i < r.bps.size(); ++i) io::write_trace_record(ss, i, r.bps[i]);
    const auto back = io::read_trace(ss);
    ASSERT_EQ(back.size(), r.bps.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].n_jobs, r.bps[i].n_jobs);
        EXPECT_EQ(back[i].services, r.bps[i].services);
        EXPECT_EQ(back[i].arrivals, r.bps[i].arrivals);
        EXPECT_EQ(back[i].y, r.bps[i].y);
        EXPECT_EQ(back[i].v, r.bps[i].v);
    }
}

TEST(Io, MalformedTraceReportsLine) {
    std::stringstream ss;
    ss << R"({"bp":0,"n_jobs":1,"v":0.5,"y":1.0,"services":[1.0],"arrivals":[0.0]})" << "\n";
    ss << R"({"bp":1,"n_jobs":2,"v":0.5,"y":1.0,"services":[1.0],"arrivals":[0.0,1.0]})" << "\n";
    try {
        io::read_trace(ss);
        FAIL() << "expected MalformedTrace";
    } catch (const MalformedTrace& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    std::stringstream garbage("{\"bp\":0,\n");
    EXPECT_THROW(io::read_trace(garbage), MalformedTrace);
}

TEST(Io, ReportsSerialise) {
    VerifyReport rep;
    rep.which = "t_w";
    VerifyEntry e;
    e.name = "x";
    e.analytic = std::numeric_limits<double>::infinity();
    rep.entries.push_back(e);
    const std::string js = io::to_json(rep);
    EXPECT_NE(js.find("\"analytic\": null"), std::string::npos);
    EXPECT_NE(js.find("\"which\": \"t_w\""), std::string::npos);
}
