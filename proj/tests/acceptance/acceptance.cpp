// Runs every acceptance criterion and prints one PASS/FAIL line each, followed by the
// individual checks behind it. Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "axlab/verify.hpp"

using namespace axlab;

namespace {

struct Criterion {
    int id;
    const char* title;
    std::function<std::vector<CheckResult>(const VerifyOptions&)> run;
};

std::vector<CheckResult> join(std::vector<CheckResult> a, const std::vector<CheckResult>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

VerifyOptions with_q(VerifyOptions o, int q)
{
    o.q = q;
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    unsigned threads = 1;
    std::vector<int> only;
    std::uint64_t seed = VerifyOptions{}.seed.value;
    app.add_option("--threads", threads, "worker threads for replica-parallel checks");
    app.add_option("--only", only, "run only these criteria");
    app.add_option("--seed", seed, "base seed");
    CLI11_PARSE(app, argc, argv);

    VerifyOptions base;
    base.threads = threads;
    base.seed = Seed{seed};

    const std::vector<Criterion> criteria{
        {1, "exact omega values", [](const VerifyOptions&) { return check_omega_exact(); }},
        {2, "critical slope", [](const VerifyOptions&) { return check_critical_slope(); }},
        {3, "phase grid", [](const VerifyOptions&) { return check_phase_grid(100); }},
        {4, "annihilation probability 1/(q-1)",
         [](const VerifyOptions& o) { return join(check_collision_fraction(o), check_collision_fraction(with_q(o, 5))); }},
        {5, "no coalescence for q=2", [](const VerifyOptions& o) { return check_two_state_purity(o); }},
        {6, "engine equivalence", [](const VerifyOptions& o) { return check_engine_equivalence(o); }},
        {7, "coupling consistency", [](const VerifyOptions& o) { return check_coupling(o); }},
        {8, "genealogy invariants", [](const VerifyOptions& o) { return check_genealogy_invariants(o); }},
        {9, "descendant martingale", [](const VerifyOptions& o) { return check_martingale(o); }},
        {10, "tail oracle", [](const VerifyOptions& o) { return check_tails(o); }},
        {11, "refined constants", [](const VerifyOptions&) { return check_refined(); }},
        {12, "six-arrow race", [](const VerifyOptions& o) { return check_race(o); }},
        {13, "regime contrast", [](const VerifyOptions& o) { return check_regime_contrast(o); }},
        {14, "geometric tail decay", [](const VerifyOptions&) { return check_geometric_tail(); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto results = c.run(base);
        bool ok = !results.empty();
        double seconds = 0.0;
        for (const auto& r : results) {
            ok = ok && r.passed;
            seconds += r.seconds;
        }
        failed += !ok;
        std::printf("%s  criterion %2d  %-36s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.title, seconds);
        for (const auto& r : results)
            std::printf("        %s %s: %s\n", r.passed ? "ok  " : "FAIL", r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
