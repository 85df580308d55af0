#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "relsim/coupled.hpp"
#include "relsim/gp.hpp"
#include "relsim/normal.hpp"
#include "test_util.hpp"

using namespace relsim;

TEST_CASE("subset-dependent learning function") {
    // corrected prediction 1.0 + 0.2 against an intermediate threshold 0.4
    // with correction sd 0.4: |1.2 - 0.4| / 0.4 = 2
    CHECK(subset_u(1.0 + 0.2, 0.4, 0.4, false) == doctest::Approx(2.0).epsilon(1e-15));
    // final subset: distance to zero regardless of any threshold estimate
    CHECK(subset_u(0.0, 0.7, 123.0, true) == doctest::Approx(0.0));
    // prediction sitting on the intermediate threshold
    CHECK(subset_u(-1.5, 0.9, -1.5, false) == doctest::Approx(0.0));
    CHECK(subset_u(1.0, 0.0, 0.5, false) == std::numeric_limits<double>::infinity());
    CHECK(subset_u(0.5, 0.0, 0.5, false) == 0.0);
}

TEST_CASE("stochastic threshold estimate") {
    std::vector<double> one{-5.0};
    CHECK(stochastic_threshold(one, 0.1, -9.0) == doctest::Approx(-9.0));
    std::vector<double> constant(40, -3.0);
    CHECK(stochastic_threshold(constant, 0.1, -9.0) == doctest::Approx(-3.0));
    // converges to the batch threshold rule once all outputs are in
    RandomStream rng(3);
    std::vector<double> seq;
    for (int i = 0; i < 5000; ++i) seq.push_back(rng.next() * 12.0 - 11.0);
    CHECK(stochastic_threshold(seq, 0.1, -9.0) ==
          doctest::Approx(select_threshold(seq, 0.1)).epsilon(1e-13));
}

TEST_CASE("gp-only coupled run brackets the analytic linear answer cheaply") {
    const ParameterSpace space = standard_normal_space(2);
    auto g = make_linear(2, 3.5);
    CoupledConfig cfg;
    cfg.n_subsets = 3;
    cfg.seed = 7;
    const CoupledResult res = run_coupled(space, *g, nullptr, cfg);
    const double truth = std_normal_cdf(-3.5);
    CHECK(res.estimate.converged);
    CHECK(std::abs(res.estimate.p_f - truth) <= 3.0 * res.estimate.cov * truth);
    CHECK(res.estimate.hf_calls < 500);
    CHECK(res.estimate.hf_calls == g->call_count());

    // ledger invariants: decision rows route by the learning function
    std::int64_t prev_cum = 0;
    std::map<int, double> thr;
    for (const auto& s : res.subsets) thr[s.index] = s.threshold;
    for (const auto& row : res.ledger.rows) {
        CHECK(row.cumulative_hf >= prev_cum);
        const bool hf_event = row.cumulative_hf > prev_cum;
        prev_cum = row.cumulative_hf;
        if (std::isfinite(row.u)) {
            if (row.source == 'H') {
                CHECK(row.u < cfg.u_threshold);
                CHECK(hf_event);
            } else {
                CHECK(row.u >= cfg.u_threshold);
                CHECK_FALSE(hf_event);
            }
        }
        if (row.subset >= 2) CHECK(row.output > thr[row.subset - 1]);
    }
    CHECK(res.ledger.rows.back().cumulative_hf == res.estimate.hf_calls);
}

TEST_CASE("identical evaluators make the correction exactly zero") {
    // LF == HF: after the initial pairs every discrepancy sample is zero, the
    // correction collapses to the nugget scale and the HF model is never
    // called again
    auto hf = make_borehole(200.0);
    auto lf = make_borehole(200.0);
    const ParameterSpace space = borehole_space();
    CoupledConfig cfg;
    cfg.n_per_subset = 1000;
    cfg.n_subsets = 3;
    cfg.seed = 11;
    cfg.strategy.kind = LfKind::PhysicsLf;
    const CoupledResult res = run_coupled(space, *hf, lf.get(), cfg);
    CHECK(res.estimate.hf_calls == cfg.n_initial);
    CHECK(hf->call_count() == cfg.n_initial);
    CHECK(res.estimate.lf_calls > 0);
}

TEST_CASE("fresh surrogates reset to the initial design size at each subset") {
    const ParameterSpace space = standard_normal_space(2);
    auto g = make_linear(2, 2.5);
    CoupledConfig cfg;
    cfg.n_per_subset = 1000;
    cfg.n_subsets = 2;
    cfg.seed = 13;
    cfg.fresh_gp_per_subset = true;
    const CoupledResult res = run_coupled(space, *g, nullptr, cfg);

    // one design batch up front plus one fresh batch for subset 2
    std::int64_t design_rows = 0;
    std::int64_t decision_hf_last = 0;
    for (const auto& row : res.ledger.rows) {
        if (row.subset == 0) {
            CHECK(row.source == 'H');
            CHECK_FALSE(std::isfinite(row.u));
            ++design_rows;
        }
        if (row.subset == 2 && row.source == 'H' && std::isfinite(row.u)) ++decision_hf_last;
    }
    CHECK(design_rows == 2 * cfg.n_initial);
    // the final surrogate holds exactly the fresh design plus the final
    // subset's own decisions
    const GpModel final_gp = GpModel::from_json_string(res.surrogate_json);
    CHECK(final_gp.size() == cfg.n_initial + decision_hf_last);
}

TEST_CASE("data-driven predictors train on the initial design and stay frozen") {
    const ParameterSpace space = standard_normal_space(2);
    for (const LfKind kind : {LfKind::GpLf, LfKind::MlpLf}) {
        auto g = make_linear(2, 2.5);
        CoupledConfig cfg;
        cfg.n_per_subset = 1500;
        cfg.n_subsets = 2;
        cfg.seed = 43;
        cfg.strategy.kind = kind;
        cfg.strategy.mlp.epochs = 800; // keep the unit suite quick
        const CoupledResult res = run_coupled(space, *g, nullptr, cfg);
        // predictor batch plus a separate correction batch
        std::int64_t doe_rows = 0;
        for (const auto& row : res.ledger.rows)
            if (row.subset == 0) ++doe_rows;
        CHECK(doe_rows == 2 * cfg.n_initial);
        CHECK(res.estimate.lf_calls > 0);
        CHECK_FALSE(res.lf_surrogate_json.empty());
        const double truth = std_normal_cdf(-2.5);
        CHECK(std::abs(res.estimate.p_f - truth) <= 4.0 * res.estimate.cov * truth);
    }
}

TEST_CASE("adaptive mode stops at the capped threshold") {
    const ParameterSpace space = standard_normal_space(2);
    auto g = make_linear(2, 2.0);
    CoupledConfig cfg;
    cfg.n_per_subset = 2000;
    cfg.adaptive = true;
    cfg.seed = 53;
    const CoupledResult res = run_coupled(space, *g, nullptr, cfg);
    CHECK(res.estimate.converged);
    CHECK(res.subsets.back().is_final);
    const double truth = std_normal_cdf(-2.0);
    CHECK(std::abs(res.estimate.p_f - truth) <= 3.0 * res.estimate.cov * truth);
}

TEST_CASE("the chain-corrected cov is reported on request") {
    const ParameterSpace space = standard_normal_space(2);
    auto g = make_linear(2, 2.0);
    CoupledConfig cfg;
    cfg.n_per_subset = 1000;
    cfg.n_subsets = 2;
    cfg.seed = 47;
    cfg.ess_corrected_cov = true;
    const CoupledResult res = run_coupled(space, *g, nullptr, cfg);
    REQUIRE(res.estimate.cov_ess.has_value());
    CHECK(*res.estimate.cov_ess >= res.estimate.cov - 1e-12);
}

TEST_CASE("runs are bitwise reproducible") {
    const ParameterSpace space = standard_normal_space(2);
    auto g1 = make_linear(2, 3.0);
    auto g2 = make_linear(2, 3.0);
    CoupledConfig cfg;
    cfg.n_per_subset = 2000;
    cfg.n_subsets = 3;
    cfg.seed = 17;
    const CoupledResult a = run_coupled(space, *g1, nullptr, cfg);
    const CoupledResult b = run_coupled(space, *g2, nullptr, cfg);
    CHECK(a.estimate.p_f == b.estimate.p_f);
    CHECK(a.estimate.cov == b.estimate.cov);
    CHECK(a.estimate.hf_calls == b.estimate.hf_calls);
    REQUIRE(a.ledger.rows.size() == b.ledger.rows.size());
    for (std::size_t i = 0; i < a.ledger.rows.size(); i += 131) {
        CHECK(a.ledger.rows[i].output == b.ledger.rows[i].output);
        CHECK(a.ledger.rows[i].source == b.ledger.rows[i].source);
    }
}

TEST_CASE("probability composition follows the independent product rule") {
    FailureEstimate a;
    a.p_f = 0.1;
    a.cov = 0.05;
    a.hf_calls = 43;
    a.total_samples = 1500;
    a.converged = true;
    FailureEstimate b;
    b.p_f = 1e-3;
    b.cov = 0.075;
    b.hf_calls = 296;
    b.total_samples = 20000;
    b.converged = true;
    const FailureEstimate c = compose_pf(a, b);
    CHECK(c.p_f == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(c.cov == doctest::Approx(0.0901387818865997).epsilon(1e-12));
    CHECK(c.hf_calls == 339);
    CHECK(c.total_samples == 21500);
    CHECK(c.converged);
    REQUIRE(c.beta.has_value());

    FailureEstimate unit;
    unit.p_f = 1.0;
    unit.cov = 0.0;
    unit.converged = true;
    const FailureEstimate same = compose_pf(a, unit);
    CHECK(same.p_f == doctest::Approx(a.p_f).epsilon(1e-15));
    CHECK(same.cov == doctest::Approx(a.cov).epsilon(1e-15));

    // published cross-check: 0.226 x 5.37e-4 rounds to 1.21e-4
    FailureEstimate outer;
    outer.p_f = 0.226;
    outer.cov = 0.047;
    FailureEstimate conditional;
    conditional.p_f = 5.37e-4;
    conditional.cov = 0.075;
    const FailureEstimate joint = compose_pf(outer, conditional);
    CHECK(joint.p_f == doctest::Approx(1.21362e-4).epsilon(1e-10));
    CHECK(std::abs(joint.p_f - 1.21e-4) < 0.005e-4);
}

TEST_CASE("budget accounting multiplies calls by cost") {
    CallLedger ledger;
    ledger.hf_calls = 100;
    ledger.lf_calls = 0;
    ledger.hf_cost_seconds = 240.0;
    CHECK(ledger.simulated_time_s() == doctest::Approx(24000.0));

    auto hf = make_borehole(200.0, 240.0);
    auto dnn_like = make_borehole_lf(0.05, 200.0, 0.0);
    auto physics = make_borehole_lf(0.05, 200.0, 11.0);
    const ModelPair dnn_pair{hf.get(), dnn_like.get()};
    const ModelPair phys_pair{hf.get(), physics.get()};

    CallLedger equal;
    equal.hf_calls = 50;
    equal.lf_calls = 5000;
    const BudgetSummary cheap = budget_report(equal, dnn_pair);
    const BudgetSummary costly = budget_report(equal, phys_pair);
    CHECK(cheap.total_seconds < costly.total_seconds);
    CHECK(cheap.hf_seconds == costly.hf_seconds);

    // fewer HF calls cannot pay for 20,000 LF calls at 11 s
    CallLedger fewer;
    fewer.hf_calls = 44; // 13% fewer
    fewer.lf_calls = 20000;
    const BudgetSummary phys = budget_report(fewer, phys_pair);
    CHECK(phys.total_seconds > cheap.total_seconds);

    const std::string table = budget_table({{"data_driven", cheap}, {"physics", phys}});
    CHECK(table.find("data_driven") != std::string::npos);
    CHECK(table.find("physics") != std::string::npos);
}
