// regemu: bound tables, simulation runs, covering-adversary experiments, and
// history checking for the fault-prone register emulation lab.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "regemu/regemu.hpp"

namespace {

using namespace regemu;

// exit-code protocol: 0 pass, 1 fail, 2 deadlock/step-cap, 3 claim violation,
// 4 inconclusive, 64 usage/parse error
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitDeadlock = 2;
constexpr int kExitClaim = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitUsage = 64;

std::pair<int, int> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        const int v = std::stoi(s);
        return {v, v};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CLI::ValidationError("--out", "cannot open " + path);
    out << text;
}

// --- bounds ---------------------------------------------------------------

int cmd_bounds(const std::string& f_range, const std::string& k_range,
               const std::string& n_range, std::uint64_t cap,
               const std::string& format, const std::string& out_path) {
    auto [f_lo, f_hi] = parse_range(f_range);
    auto [k_lo, k_hi] = parse_range(k_range);
    if (f_lo < 1 || k_lo < 1 || f_hi < f_lo || k_hi < k_lo)
        throw CLI::ValidationError("bounds", "invalid grid ranges");

    struct Row {
        int n, f, k;
        std::string base;
        std::uint64_t lower, upper;
        bool tight;
    };
    std::vector<Row> rows;
    for (int f = f_lo; f <= f_hi; ++f) {
        for (int k = k_lo; k <= k_hi; ++k) {
            int n_lo = 2 * f + 1, n_hi = k * f + f + 3;
            if (!n_range.empty() && n_range != "auto") {
                auto [a, b] = parse_range(n_range);
                n_lo = a;
                n_hi = b;
            }
            for (int n = n_lo; n <= n_hi; ++n) {
                if (n < 2 * f + 1) continue;
                SystemConfig cfg{n, f, k};
                const auto lo = lower_bound_registers(cfg);
                const auto hi = upper_bound_registers(cfg);
                rows.push_back({n, f, k, "register", lo, hi, lo == hi});
                rows.push_back({n, f, k, "max-register", bound_max_register(f),
                                bound_max_register(f), true});
                rows.push_back({n, f, k, "cas", bound_cas(f), bound_cas(f), true});
            }
        }
    }

    std::string text;
    if (format == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const Row& r : rows) {
            nlohmann::ordered_json j;
            j["n"] = r.n;
            j["f"] = r.f;
            j["k"] = r.k;
            j["base_type"] = r.base;
            j["lower"] = r.lower;
            j["upper"] = r.upper;
            j["tight"] = r.tight;
            if (cap > 0 && r.base == "register")
                j["min_servers_at_cap"] = lower_bound_servers(cap, r.f, r.k);
            arr.push_back(std::move(j));
        }
        text = arr.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "n,f,k,base_type,lower,upper,tight";
        if (cap > 0) os << ",min_servers_at_cap";
        os << "\n";
        for (const Row& r : rows) {
            os << r.n << ',' << r.f << ',' << r.k << ',' << r.base << ',' << r.lower
               << ',' << r.upper << ',' << (r.tight ? "yes" : "no");
            if (cap > 0)
                os << ',' << (r.base == "register"
                                  ? std::to_string(lower_bound_servers(cap, r.f, r.k))
                                  : "");
            os << "\n";
        }
        text = os.str();
    }
    write_text(out_path, text);
    return kExitPass;
}

// --- layout ---------------------------------------------------------------

int cmd_layout(int n, int f, int k, const std::string& emulation,
               const std::string& out_path) {
    SystemConfig cfg{n, f, k};
    const Placement p = make_placement(emulation, cfg);
    write_text(out_path, placement_to_json(p).dump(2) + "\n");
    return kExitPass;
}

// --- simulate ---------------------------------------------------------------

// workload DSL: "CLIENT:op,op;CLIENT:op,..." with op = wV | r | wmV | rm.
// Writes are chained in listing order so generated runs stay write-sequential.
Workload parse_workload_dsl(const std::string& dsl) {
    Workload w;
    std::istringstream clients(dsl);
    std::string part;
    while (std::getline(clients, part, ';')) {
        if (part.empty()) continue;
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--workload", "expected CLIENT:ops in " + part);
        const ClientId c = std::stoi(part.substr(0, colon));
        std::istringstream ops(part.substr(colon + 1));
        std::string tok;
        while (std::getline(ops, tok, ',')) {
            WorkItem it;
            it.client = c;
            if (tok == "r") it.op = HighLevelOp::read();
            else if (tok == "rm") it.op = HighLevelOp::read_max();
            else if (tok.rfind("wm", 0) == 0) {
                it.op = HighLevelOp::write_max(std::stoull(tok.substr(2)));
                it.chained = true;
            } else if (tok.rfind('w', 0) == 0) {
                it.op = HighLevelOp::write(std::stoull(tok.substr(1)));
                it.chained = true;
            } else {
                throw CLI::ValidationError("--workload", "unknown op " + tok);
            }
            w.push_back(it);
        }
    }
    return w;
}

FaultPlan parse_crashes(const std::vector<std::string>& specs, const SystemConfig& cfg) {
    FaultPlan plan;
    for (const std::string& s : specs) {
        const auto at = s.find('@');
        if (at == std::string::npos)
            throw CLI::ValidationError("--crash", "expected SERVER@STEP, got " + s);
        plan.server_crashes.emplace_back(std::stoi(s.substr(0, at)),
                                         std::stoull(s.substr(at + 1)));
    }
    plan.validate(cfg);
    return plan;
}

int cmd_simulate(int n, int f, int k, const std::string& emulation,
                 const std::string& workload_dsl, int writes, int reads,
                 const std::vector<std::string>& crash_specs, std::uint64_t seed,
                 bool exhaustive, std::uint64_t step_cap, std::size_t bound,
                 const std::string& out_path) {
    SystemConfig cfg{n, f, k};
    cfg.validate();

    if (exhaustive) {
        if (emulation != "cas-max")
            throw CLI::ValidationError("--exhaustive", "exhaustive mode drives cas-max");
        Workload flat = workload_dsl.empty()
                            ? parse_workload_dsl("0:wm2,rm;1:wm4")
                            : parse_workload_dsl(workload_dsl);
        ExploreWorkload w;
        for (const WorkItem& it : flat) w[it.client].push_back(it.op);
        const Placement placement = make_placement(emulation, cfg);
        CasMaxEmulation proto(placement);
        std::uint64_t bad = 0, bound_breaks = 0;
        auto stats = explore_all(placement, proto, w, [&](const History& h) {
            if (!check_atomic_high(h, SpecKind::HighMaxRegister, bound).pass()) ++bad;
            if (!casmax_iteration_bound_holds(h)) ++bound_breaks;
        });
        nlohmann::ordered_json j;
        j["paths"] = stats.paths;
        j["atomicity_failures"] = bad;
        j["iteration_bound_failures"] = bound_breaks;
        std::cout << j.dump() << "\n";
        return (bad || bound_breaks) ? kExitFail : kExitPass;
    }

    Workload w;
    if (!workload_dsl.empty()) {
        w = parse_workload_dsl(workload_dsl);
    } else {
        SplitMix64 rng = SplitMix64(seed).split("workload");
        for (int i = 0; i < writes; ++i) {
            WorkItem it;
            it.client = static_cast<ClientId>(rng.below(k));
            it.op = emulation == "cas-max" ? HighLevelOp::write_max(1000 + i)
                                           : HighLevelOp::write(1000 + i);
            it.chained = true;
            w.push_back(it);
        }
        for (int i = 0; i < reads; ++i) {
            WorkItem it;
            it.client = static_cast<ClientId>(k + rng.below(3));
            it.op = emulation == "cas-max" ? HighLevelOp::read_max() : HighLevelOp::read();
            it.not_before = rng.below(40);
            w.push_back(it);
        }
    }
    const FaultPlan faults = parse_crashes(crash_specs, cfg);
    auto r = run_fair(emulation, cfg, w, faults, seed, step_cap);
    if (!out_path.empty()) write_text(out_path, history_to_jsonl(r.history()));

    nlohmann::ordered_json summary;
    summary["status"] = r.outcome.ok() ? "completed" : r.outcome.diagnostic;
    summary["events"] = r.history().length();
    summary["resources"] = count_resources(r.history());
    if (!r.outcome.ok()) {
        std::cout << summary.dump() << "\n";
        std::cerr << "run did not complete: " << r.outcome.diagnostic << "\n";
        return kExitDeadlock;
    }

    Verdict v = emulation == "cas-max"
                    ? check_atomic_high(r.history(), SpecKind::HighMaxRegister, bound)
                    : check_ws_regular(r.history(), bound);
    summary["verdict"] = v.to_json();
    std::cout << summary.dump() << "\n";
    if (v.status == Verdict::Status::Inconclusive ||
        v.status == Verdict::Status::NotApplicable)
        return kExitInconclusive;
    return v.pass() ? kExitPass : kExitFail;
}

// --- adversary ---------------------------------------------------------------

int cmd_adversary(int n, int f, int k, const std::string& emulation,
                  const std::string& f_spec, std::uint64_t seed,
                  const std::string& out_path) {
    SystemConfig cfg{n, f, k};
    cfg.validate();

    std::vector<std::set<ServerId>> choices;
    if (f_spec == "all") {
        choices = f_choices(n, f, std::numeric_limits<std::size_t>::max(), seed);
    } else if (f_spec.rfind("sample:", 0) == 0) {
        choices = f_choices(n, f, std::stoull(f_spec.substr(7)), seed);
    } else {
        std::set<ServerId> F;
        std::istringstream in(f_spec);
        std::string tok;
        while (std::getline(in, tok, ',')) F.insert(std::stoi(tok));
        if (static_cast<int>(F.size()) != f + 1)
            throw CLI::ValidationError("--F", "need exactly f+1 distinct servers");
        choices.push_back(std::move(F));
    }

    ExperimentOptions opts;
    opts.assert_claims = emulation == "rw-register";
    auto reports = nlohmann::ordered_json::array();
    int exit_code = kExitPass;
    for (const auto& F : choices) {
        CoveringReport rep = run_covering_experiment(cfg, emulation, F, seed, opts);
        reports.push_back(rep.to_json());
        if (!rep.ok()) {
            exit_code = kExitClaim;
            for (const auto& v : rep.violations)
                std::cerr << "claim " << v.claim << " violated in phase " << v.phase
                          << " at t=" << v.t << ": " << v.message << "\n";
        }
    }
    write_text(out_path, reports.dump(2) + "\n");
    return exit_code;
}

// --- check ---------------------------------------------------------------

int cmd_check(const std::string& history_path, const std::string& mode,
              const std::string& target, const std::string& object_kind,
              std::size_t bound) {
    History h;
    try {
        std::ifstream in(history_path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot open " << history_path << "\n";
            return kExitUsage;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        h = history_from_jsonl(ss.str());
    } catch (const std::exception& ex) {
        std::cerr << "history parse error: " << ex.what() << "\n";
        return kExitUsage;
    }

    Verdict v;
    if (mode == "ws-regular") {
        v = check_ws_regular(h, bound);
    } else if (mode == "ws-safe") {
        v = check_ws_safe(h, bound);
    } else if (mode == "atomic") {
        if (target == "emulated") {
            const SpecKind spec = object_kind == "max-register"
                                      ? SpecKind::HighMaxRegister
                                      : SpecKind::HighRegister;
            v = check_atomic_high(h, spec, bound);
        } else {
            // infer base kinds from the triggers in the history
            ObjectId max_obj = -1;
            for (const Event& e : h.events)
                if (e.kind == EventKind::Trigger) max_obj = std::max(max_obj, e.object);
            std::vector<ObjectKind> kinds(max_obj + 1, ObjectKind::Register);
            for (const Event& e : h.events) {
                if (e.kind != EventKind::Trigger) continue;
                if (e.lop.kind == LowOpKind::ReadMax || e.lop.kind == LowOpKind::WriteMax)
                    kinds[e.object] = ObjectKind::MaxRegister;
                if (e.lop.kind == LowOpKind::Cas) kinds[e.object] = ObjectKind::Cas;
            }
            v = check_atomic_base(h, kinds, bound);
        }
    } else {
        std::cerr << "unknown mode " << mode << "\n";
        return kExitUsage;
    }

    std::cout << v.to_json().dump() << "\n";
    switch (v.status) {
        case Verdict::Status::Pass: return kExitPass;
        case Verdict::Status::Fail: return kExitFail;
        default: return kExitInconclusive;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fault-prone register emulation lab"};
    app.require_subcommand(1);

    // bounds
    std::string f_range = "1..3", k_range = "1..6", n_range = "auto";
    std::uint64_t cap = 0;
    std::string format = "csv", out_path;
    auto* bounds = app.add_subcommand("bounds", "closed-form resource bound tables");
    bounds->add_option("--f", f_range, "failure threshold or range (e.g. 1..3)");
    bounds->add_option("--k", k_range, "writer count or range");
    bounds->add_option("--n", n_range, "server count or range; auto = 2f+1..kf+f+3");
    bounds->add_option("--cap", cap, "minimum-server column for a per-server register cap");
    bounds->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    bounds->add_option("--out", out_path, "output file (default stdout)");

    // layout
    int n = 3, f = 1, k = 1;
    std::string emulation = "rw-register";
    std::string layout_out;
    auto* layout = app.add_subcommand("layout", "placement document for a configuration");
    layout->add_option("--n", n)->required();
    layout->add_option("--f", f)->required();
    layout->add_option("--k", k)->required();
    layout->add_option("--emulation", emulation)
        ->check(CLI::IsMember({"rw-register", "abd-max", "cas-max"}));
    layout->add_option("--out", layout_out);

    // simulate
    int sim_n = 3, sim_f = 1, sim_k = 1, writes = 2, reads = 2;
    std::string sim_emulation = "rw-register", workload_dsl, sim_out;
    std::vector<std::string> crash_specs;
    std::uint64_t seed = 0, step_cap = Engine::default_step_cap;
    std::size_t bound = 12;
    bool exhaustive = false;
    auto* simulate = app.add_subcommand("simulate", "run an emulation and check it");
    simulate->add_option("--n", sim_n)->required();
    simulate->add_option("--f", sim_f)->required();
    simulate->add_option("--k", sim_k)->required();
    simulate->add_option("--emulation", sim_emulation)
        ->check(CLI::IsMember({"rw-register", "abd-max", "cas-max"}));
    simulate->add_option("--workload", workload_dsl,
                         "explicit ops, e.g. \"0:w5,r;1:w7\" (writes are chained)");
    simulate->add_option("--writes", writes, "generated chained writes");
    simulate->add_option("--reads", reads, "generated reads");
    simulate->add_option("--crash", crash_specs, "server crash SERVER@STEP (repeatable)");
    simulate->add_option("--seed", seed);
    simulate->add_option("--step-cap", step_cap);
    simulate->add_option("--bound", bound, "checker search bound (ops per check)");
    simulate->add_flag("--exhaustive", exhaustive,
                       "enumerate every interleaving (cas-max)");
    simulate->add_option("--out", sim_out, "history JSON-lines file");

    // adversary
    int adv_n = 3, adv_f = 1, adv_k = 1;
    std::string adv_emulation = "rw-register", f_spec = "sample:20", adv_out;
    std::uint64_t adv_seed = 0;
    auto* adversary = app.add_subcommand("adversary", "covering experiment under Ad_i");
    adversary->add_option("--n", adv_n)->required();
    adversary->add_option("--f", adv_f)->required();
    adversary->add_option("--k", adv_k)->required();
    adversary->add_option("--emulation", adv_emulation)
        ->check(CLI::IsMember({"rw-register", "abd-max", "cas-max"}));
    adversary->add_option("--F", f_spec, "\"0,1\" explicit | all | sample:N");
    adversary->add_option("--seed", adv_seed);
    adversary->add_option("--out", adv_out, "covering report JSON");

    // check
    std::string history_path, mode = "ws-regular", target = "objects",
                object_kind = "register";
    std::size_t check_bound = 12;
    auto* check = app.add_subcommand("check", "consistency verdict for a history file");
    check->add_option("--history", history_path)->required();
    check->add_option("--mode", mode)
        ->check(CLI::IsMember({"ws-regular", "ws-safe", "atomic"}));
    check->add_option("--target", target, "atomic mode: objects | emulated")
        ->check(CLI::IsMember({"objects", "emulated"}));
    check->add_option("--object-kind", object_kind)
        ->check(CLI::IsMember({"register", "max-register", "cas"}));
    check->add_option("--bound", check_bound, "search bound (ops per check)");

    try {
        app.parse(argc, argv);
        if (bounds->parsed())
            return cmd_bounds(f_range, k_range, n_range, cap, format, out_path);
        if (layout->parsed()) return cmd_layout(n, f, k, emulation, layout_out);
        if (simulate->parsed())
            return cmd_simulate(sim_n, sim_f, sim_k, sim_emulation, workload_dsl, writes,
                                reads, crash_specs, seed, exhaustive, step_cap, bound,
                                sim_out);
        if (adversary->parsed())
            return cmd_adversary(adv_n, adv_f, adv_k, adv_emulation, f_spec, adv_seed,
                                 adv_out);
        if (check->parsed())
            return cmd_check(history_path, mode, target, object_kind, check_bound);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
