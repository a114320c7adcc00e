#include <gtest/gtest.h>

#include <sstream>

#include "serene/config.hpp"
#include "serene/roster.hpp"

using namespace serene;

TEST(Config, DefaultsAreValid) {
    ScenarioConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.effective_cvt_len(), 5);
    EXPECT_EQ(cfg.obs_per_edge, 12);
    EXPECT_EQ(cfg.pair_pool_target, 8);
}

TEST(Config, EffectiveCvtLenRoundsQuarterOfN) {
    ScenarioConfig cfg;
    cfg.n_workers = 10;
    EXPECT_EQ(cfg.effective_cvt_len(), 3);  // 2.5 rounds up
    cfg.cvt_len = 7;
    EXPECT_EQ(cfg.effective_cvt_len(), 7);
}

TEST(Config, RejectsBrokenInvariants) {
    auto broken = [](auto mutate) {
        ScenarioConfig cfg;
        mutate(cfg);
        return cfg;
    };
    EXPECT_THROW(broken([](auto& c) { c.pool_size = 4; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.pool_size = 1; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.n_workers = 2; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.colluding_fraction = 0.7; c.naive_fraction = 0.4; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.colluding_fraction = 0.95; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.rtt_min_ms = 30; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.cvt_len = -1; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.p_collude = 1.5; }).validate(), ConfigError);
    EXPECT_NO_THROW(broken([](auto& c) { c.colluding_fraction = 0.9; }).validate());
}

TEST(Config, ParsesKeyValueFormat) {
    std::istringstream in("# scenario\n n_workers = 30 \np_collude=0.9\n\nhalt_on_finalize = false # trailing\n");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.n_workers, 30);
    EXPECT_DOUBLE_EQ(cfg.p_collude, 0.9);
    EXPECT_FALSE(cfg.halt_on_finalize);
    EXPECT_EQ(cfg.pool_size, 3);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    std::istringstream unknown("flux = 3\n");
    EXPECT_THROW(parse_config(unknown), ConfigError);
    std::istringstream bad("n_workers = twenty\n");
    EXPECT_THROW(parse_config(bad), ConfigError);
    std::istringstream no_eq("n_workers 20\n");
    EXPECT_THROW(parse_config(no_eq), ConfigError);
    ScenarioConfig cfg;
    EXPECT_THROW(cfg.set("halt_on_finalize", "maybe"), ConfigError);
}

TEST(Config, WriteThenParseRoundTrips) {
    ScenarioConfig cfg;
    cfg.n_workers = 31;
    cfg.p_collude = 0.123456789;
    cfg.rng_seed = 0xfeedfacecafeULL;
    cfg.ring_shared_memory = true;
    std::stringstream io;
    write_config(io, cfg);
    EXPECT_EQ(parse_config(io), cfg);
}

TEST(Roster, HalfColluding) {
    ScenarioConfig cfg;
    Rng rng(1);
    const auto counts = count_classes(build_roster(cfg, rng));
    EXPECT_EQ(counts.colluding, 10);
    EXPECT_EQ(counts.honest, 10);
    EXPECT_EQ(counts.naive, 0);
}

TEST(Roster, NoCollusionControl) {
    ScenarioConfig cfg;
    cfg.colluding_fraction = 0.0;
    Rng rng(2);
    EXPECT_EQ(count_classes(build_roster(cfg, rng)).honest, 20);
}

TEST(Roster, NinetyPercentColluding) {
    ScenarioConfig cfg;
    cfg.colluding_fraction = 0.9;
    Rng rng(3);
    const auto counts = count_classes(build_roster(cfg, rng));
    EXPECT_EQ(counts.colluding, 18);
    EXPECT_EQ(counts.honest, 2);
}

TEST(Roster, SameSeedSameRosterDifferentSeedsDiffer) {
    ScenarioConfig cfg;
    Rng a(42), b(42), c(43);
    const auto ra = build_roster(cfg, a);
    EXPECT_EQ(ra, build_roster(cfg, b));
    EXPECT_NE(ra, build_roster(cfg, c));
}

TEST(Roster, CountsTrackFractionsWithinOneWorker) {
    Rng rng(5);
    for (int n = 5; n <= 40; ++n)
        for (double c = 0.0; c <= 0.9; c += 0.05)
            for (double m : {0.0, 0.05, 0.1}) {
                ScenarioConfig cfg;
                cfg.n_workers = n;
                cfg.colluding_fraction = c;
                cfg.naive_fraction = m;
                try {
                    cfg.validate();
                } catch (const ConfigError&) {
                    continue;
                }
                const auto counts = count_classes(build_roster(cfg, rng));
                EXPECT_LE(std::abs(counts.colluding - n * c), 1.0);
                EXPECT_LE(std::abs(counts.naive - n * m), 1.0);
                EXPECT_EQ(counts.colluding + counts.naive + counts.honest, n);
                EXPECT_GE(counts.honest, 2);
            }
}
