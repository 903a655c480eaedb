// qlat - layout-to-reliability analysis for superconducting processors.
//
// Subcommands chain the pipeline stages: capacitance network -> effective
// Hamiltonian -> interaction-graph distortion -> perturbation sensitivity ->
// pulse-level infidelity -> per-edge compiler guidance. Machine-readable
// output goes to files or stdout; progress and summaries go to stderr.
//
// Exit codes: 0 ok, 2 validation/parameter error, 3 numerical error,
// 4 capacity error.

#include "qlat/advisor.hpp"
#include "qlat/capnet.hpp"
#include "qlat/dynamics.hpp"
#include "qlat/errors.hpp"
#include "qlat/geomsweep.hpp"
#include "qlat/hamiltonian.hpp"
#include "qlat/sensitivity.hpp"
#include "qlat/topology.hpp"
#include "qlat/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using nlohmann::json;

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qlat::ValidationError("cannot write output file: " + path);
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

void write_json(const json& j, const std::string& path) {
    write_output(j.dump(2), path);
}

struct PipelineOutput {
    qlat::capnet::CapacitanceNetwork net;
    qlat::hamiltonian::EffectiveHamiltonian ham;
};

PipelineOutput build_pipeline(const std::string& network_file) {
    qlat::capnet::CapacitanceNetwork net = qlat::capnet::CapacitanceNetwork::load(network_file);
    const qlat::capnet::MaxwellMatrix c = qlat::capnet::to_maxwell_matrix(net);
    const qlat::capnet::ChargingEnergyMatrix ec = qlat::capnet::charging_energy_matrix(c);
    qlat::hamiltonian::EffectiveHamiltonian ham =
        qlat::hamiltonian::build_effective_hamiltonian(ec, net);
    return PipelineOutput{std::move(net), std::move(ham)};
}

qlat::topology::LTDReport make_ltd_report(const qlat::hamiltonian::EffectiveHamiltonian& ham,
                                          const qlat::topology::InteractionGraph& nominal,
                                          double tau_min) {
    const qlat::topology::CouplingExtraction ext = qlat::topology::extract_couplings(ham);
    const qlat::topology::PairMap normalized = qlat::topology::normalize_couplings(ext.magnitudes);
    const double anchor = qlat::topology::max_magnitude(ext.magnitudes);
    const qlat::topology::InteractionGraph physical = qlat::topology::reconstruct_physical_graph(
        normalized, tau_min, static_cast<int>(ham.mode_count()));
    return qlat::topology::ltd_report(nominal, physical,
                                      qlat::topology::scale_directed(ext.directed, anchor));
}

int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"layout-to-reliability analysis for superconducting processors"};
    app.set_version_flag("--version", std::string("qlat ") + qlat::kVersion +
                                          " (synthetic model calibration " +
                                          qlat::geomsweep::kCalibrationVersion + ")");

    int jobs = default_jobs();
    app.add_option("--jobs", jobs, "worker threads for sweep steps and per-node loops")
        ->capture_default_str();

    // --- ham ---------------------------------------------------------------
    auto* cmd_ham = app.add_subcommand("ham", "build the effective Hamiltonian from a network");
    cmd_ham->fallthrough();
    std::string ham_network, ham_out;
    cmd_ham->add_option("network", ham_network, "capacitance network JSON")->required();
    cmd_ham->add_option("-o,--out", ham_out, "output file (default stdout)");

    // --- ltd ---------------------------------------------------------------
    auto* cmd_ltd = app.add_subcommand("ltd", "distortion report against a nominal topology");
    cmd_ltd->fallthrough();
    std::string ltd_network, ltd_nominal, ltd_out;
    double ltd_tau = 0.02;
    cmd_ltd->add_option("network", ltd_network, "capacitance network JSON")->required();
    cmd_ltd->add_option("nominal", ltd_nominal, "nominal topology JSON")->required();
    cmd_ltd->add_option("--tau-min", ltd_tau, "significance threshold in (0,1)")
        ->capture_default_str();
    cmd_ltd->add_option("-o,--out", ltd_out, "output file (default stdout)");

    // --- si ----------------------------------------------------------------
    auto* cmd_si = app.add_subcommand("si", "per-node sensitivity report");
    cmd_si->fallthrough();
    std::string si_network, si_nominal, si_out, si_channel = "ground_capacitance";
    double si_tau = 0.02;
    double si_delta = 1e-3;
    cmd_si->add_option("network", si_network, "capacitance network JSON")->required();
    cmd_si->add_option("nominal", si_nominal, "nominal topology JSON")->required();
    cmd_si->add_option("--tau-min", si_tau, "significance threshold in (0,1)")
        ->capture_default_str();
    cmd_si->add_option("--delta", si_delta, "relative perturbation in (0, 0.1)")
        ->capture_default_str();
    cmd_si->add_option("--channel", si_channel, "ground_capacitance | josephson_energy")
        ->capture_default_str();
    cmd_si->add_option("-o,--out", si_out, "output file (default stdout)");

    // --- dynamics ----------------------------------------------------------
    auto* cmd_dyn = app.add_subcommand("dynamics", "pulse-driven relative infidelity");
    cmd_dyn->fallthrough();
    std::string dyn_layout, dyn_reference, dyn_pulse, dyn_out, dyn_state = "ground";
    int dyn_dims = 3;
    double dyn_dt = 0.0;
    cmd_dyn->add_option("layout", dyn_layout, "layout network JSON")->required();
    cmd_dyn->add_option("reference", dyn_reference, "reference network JSON")->required();
    cmd_dyn->add_option("pulse", dyn_pulse, "pulse spec JSON")->required();
    cmd_dyn->add_option("--truncation", dyn_dims, "levels per mode (>= 2)")
        ->capture_default_str();
    cmd_dyn->add_option("--state", dyn_state, "initial state: ground | plus")
        ->capture_default_str();
    cmd_dyn->add_option("--dt", dyn_dt, "integrator step in ns (0 = auto)")
        ->capture_default_str();
    cmd_dyn->add_option("-o,--out", dyn_out, "output file (default stdout)");

    // --- sweep --------------------------------------------------------------
    auto* cmd_sweep = app.add_subcommand("sweep", "calibrated geometry sweep with bench pulses");
    cmd_sweep->fallthrough();
    std::string sweep_axis = "A", sweep_regime = "all", sweep_csv, sweep_json_path;
    int sweep_steps = 9;
    int sweep_dims = 3;
    double sweep_tau = 0.02;
    double sweep_delta = 1e-3;
    cmd_sweep->add_option("--axis", sweep_axis, "A (coupler width) | B (island height)")
        ->capture_default_str();
    cmd_sweep->add_option("--steps", sweep_steps, "sweep steps (>= 3)")->capture_default_str();
    cmd_sweep->add_option("--regime", sweep_regime,
                          "bucket/regression regime: short|medium|long|overdrive|all")
        ->capture_default_str();
    cmd_sweep->add_option("--tau-min", sweep_tau, "significance threshold")->capture_default_str();
    cmd_sweep->add_option("--delta", sweep_delta, "sensitivity perturbation")
        ->capture_default_str();
    cmd_sweep->add_option("--truncation", sweep_dims, "levels per mode")->capture_default_str();
    cmd_sweep->add_option("--out-csv", sweep_csv, "sweep table CSV path");
    cmd_sweep->add_option("-o,--out", sweep_json_path, "JSON report path (default stdout)");

    // --- advise -------------------------------------------------------------
    auto* cmd_advise = app.add_subcommand("advise", "per-edge assessment table from a chain spec");
    cmd_advise->fallthrough();
    std::string advise_chain, advise_out, advise_csv;
    int advise_dims = 3;
    double advise_tau = 0.02;
    cmd_advise->add_option("chain", advise_chain, "chain spec JSON")->required();
    cmd_advise->add_option("--tau-min", advise_tau, "significance threshold")
        ->capture_default_str();
    cmd_advise->add_option("--truncation", advise_dims, "levels per mode")->capture_default_str();
    cmd_advise->add_option("--csv", advise_csv, "assessment table CSV path");
    cmd_advise->add_option("-o,--out", advise_out, "JSON report path (default stdout)");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cmd_ham) {
            const PipelineOutput p = build_pipeline(ham_network);
            write_json(qlat::hamiltonian::to_json(p.ham), ham_out);
            std::cerr << "ham: " << p.ham.mode_count() << " modes\n";
        } else if (*cmd_ltd) {
            const PipelineOutput p = build_pipeline(ltd_network);
            const qlat::topology::InteractionGraph nominal =
                qlat::topology::InteractionGraph::load(ltd_nominal);
            const qlat::topology::LTDReport report = make_ltd_report(p.ham, nominal, ltd_tau);
            write_json(qlat::topology::to_json(report), ltd_out);
            std::cerr << "ltd: " << report.ltd << " (weighted " << report.ltd_weighted << ")\n";
        } else if (*cmd_si) {
            const qlat::capnet::CapacitanceNetwork net =
                qlat::capnet::CapacitanceNetwork::load(si_network);
            const qlat::topology::InteractionGraph nominal =
                qlat::topology::InteractionGraph::load(si_nominal);
            qlat::sensitivity::SIOptions opts;
            opts.tau_min = si_tau;
            opts.delta = si_delta;
            opts.channel = qlat::sensitivity::channel_from_string(si_channel);
            opts.jobs = jobs;
            const qlat::sensitivity::SIReport report =
                qlat::sensitivity::si_report(net, nominal, opts);
            write_json(qlat::sensitivity::to_json(report), si_out);
            std::cerr << "si: " << report.si.size() << " nodes\n";
        } else if (*cmd_dyn) {
            const PipelineOutput layout = build_pipeline(dyn_layout);
            const PipelineOutput reference = build_pipeline(dyn_reference);
            const qlat::dynamics::PulseSpec pulse = qlat::dynamics::PulseSpec::load(dyn_pulse);
            const qlat::dynamics::DuffingModel ref_model =
                qlat::dynamics::build_duffing(reference.ham, dyn_dims);
            qlat::dynamics::State psi0;
            if (dyn_state == "ground") {
                psi0 = qlat::dynamics::ground_state(ref_model);
            } else if (dyn_state == "plus") {
                psi0 = qlat::dynamics::plus_state(ref_model, pulse.drive_node);
            } else {
                throw qlat::ValidationError("unknown initial state '" + dyn_state + "'");
            }
            qlat::dynamics::EvolveOptions evolve_opts;
            evolve_opts.dt_ns = dyn_dt;
            const qlat::dynamics::FidelityResult fid = qlat::dynamics::relative_infidelity(
                layout.ham, reference.ham, pulse, psi0, dyn_dims, evolve_opts);
            write_json(qlat::dynamics::to_json(fid), dyn_out);
            std::cerr << "dynamics: 1-F = " << fid.relative_infidelity << "\n";
        } else if (*cmd_sweep) {
            qlat::geomsweep::SweepOptions opts;
            opts.axis = qlat::geomsweep::sweep_axis_from_string(sweep_axis);
            opts.steps = sweep_steps;
            opts.tau_min = sweep_tau;
            opts.delta = sweep_delta;
            opts.mode_dims = sweep_dims;
            opts.jobs = jobs;
            const std::vector<qlat::geomsweep::SweepRecord> records =
                qlat::geomsweep::run_sweep(opts);
            if (!sweep_csv.empty()) {
                write_output(qlat::geomsweep::sweep_to_csv(records), sweep_csv);
            }
            json out{{"axis", qlat::geomsweep::to_string(opts.axis)},
                     {"calibration", qlat::geomsweep::kCalibrationVersion},
                     {"records", qlat::geomsweep::sweep_to_json(records)}};
            std::vector<qlat::dynamics::PulseRegime> regimes;
            if (sweep_regime == "all") {
                regimes = {qlat::dynamics::PulseRegime::Short, qlat::dynamics::PulseRegime::Medium,
                           qlat::dynamics::PulseRegime::Long,
                           qlat::dynamics::PulseRegime::Overdrive};
            } else {
                regimes = {qlat::dynamics::pulse_regime_from_string(sweep_regime)};
            }
            json buckets = json::array();
            json regressions = json::array();
            for (const qlat::dynamics::PulseRegime r : regimes) {
                buckets.push_back(qlat::geomsweep::to_json(qlat::geomsweep::si_buckets(records, r)));
                try {
                    regressions.push_back(qlat::geomsweep::to_json(
                        qlat::geomsweep::sensitivity_regression(records, r)));
                } catch (const qlat::ValidationError& e) {
                    // Too few records or a degenerate design; keep the sweep.
                    regressions.push_back(json{{"regime", qlat::dynamics::to_string(r)},
                                               {"error", e.what()}});
                }
            }
            out["si_buckets"] = buckets;
            out["regressions"] = regressions;
            write_json(out, sweep_json_path);
            std::cerr << "sweep: " << records.size() << " records\n";
        } else if (*cmd_advise) {
            std::ifstream in(advise_chain);
            if (!in) throw qlat::ValidationError("cannot open chain spec: " + advise_chain);
            json chain;
            try {
                in >> chain;
            } catch (const json::exception& e) {
                throw qlat::ValidationError(advise_chain + ": " + std::string(e.what()));
            }
            if (!chain.contains("edges") || !chain["edges"].is_array() ||
                chain["edges"].empty()) {
                throw qlat::ValidationError("chain spec: 'edges' must be a non-empty array");
            }

            const qlat::topology::InteractionGraph nominal = qlat::geomsweep::qcq_nominal_graph();
            const qlat::capnet::CapacitanceNetwork ref_net =
                qlat::geomsweep::synthetic_capacitance(qlat::geomsweep::GeometryKnobs::baseline());
            const PipelineOutput ref{ref_net, [&] {
                                         const auto c = qlat::capnet::to_maxwell_matrix(ref_net);
                                         const auto ec = qlat::capnet::charging_energy_matrix(c);
                                         return qlat::hamiltonian::build_effective_hamiltonian(
                                             ec, ref_net);
                                     }()};
            const qlat::dynamics::DuffingModel ref_model =
                qlat::dynamics::build_duffing(ref.ham, advise_dims);
            std::vector<qlat::dynamics::PulseSpec> pulses = qlat::dynamics::full_pulse_library();
            std::string eps2q_id;
            for (qlat::dynamics::PulseSpec& p : pulses) {
                if (p.family == qlat::dynamics::PulseFamily::CouplerMod) {
                    p.drive_node = 1;
                    p.target_node = 2;
                } else {
                    p.drive_node = 0;
                    p.target_node = 2;
                }
                p = qlat::dynamics::resolve_pulse(p, ref_model);
                if (p.family == qlat::dynamics::PulseFamily::CrGaussianFlattop &&
                    p.regime == qlat::dynamics::PulseRegime::Medium) {
                    eps2q_id = p.id();
                }
            }
            const qlat::dynamics::State psi0 = qlat::dynamics::plus_state(ref_model, 0);

            std::vector<qlat::advisor::EdgeAssessment> assessments;
            for (const auto& edge : chain["edges"]) {
                if (!edge.contains("id") || !edge.contains("variants") ||
                    !edge["variants"].is_array() || edge["variants"].empty()) {
                    throw qlat::ValidationError(
                        "chain spec: each edge needs an 'id' and a non-empty 'variants' array");
                }
                const std::string id = edge["id"].get<std::string>();
                std::vector<double> ltds;
                qlat::advisor::PulseGrid grid;
                for (const auto& vj : edge["variants"]) {
                    const qlat::geomsweep::GeometryKnobs knobs =
                        qlat::geomsweep::GeometryKnobs::from_json(vj);
                    const qlat::capnet::CapacitanceNetwork net =
                        qlat::geomsweep::synthetic_capacitance(knobs);
                    const auto c = qlat::capnet::to_maxwell_matrix(net);
                    const auto ec = qlat::capnet::charging_energy_matrix(c);
                    const qlat::hamiltonian::EffectiveHamiltonian ham =
                        qlat::hamiltonian::build_effective_hamiltonian(ec, net);
                    const qlat::topology::LTDReport ltd =
                        make_ltd_report(ham, nominal, advise_tau);
                    ltds.push_back(ltd.ltd);
                    for (const qlat::dynamics::PulseSpec& pulse : pulses) {
                        const qlat::dynamics::FidelityResult fid =
                            qlat::dynamics::relative_infidelity(ham, ref.ham, pulse, psi0,
                                                                advise_dims);
                        grid[pulse.id()].push_back(fid.relative_infidelity);
                    }
                }
                assessments.push_back(qlat::advisor::assess_edge(id, ltds, grid, eps2q_id));
            }
            qlat::advisor::apply_alignment(assessments);
            if (!advise_csv.empty()) {
                write_output(qlat::advisor::assessments_to_csv(assessments), advise_csv);
            }
            write_json(qlat::advisor::to_json(assessments), advise_out);
            std::cerr << "advise: " << assessments.size() << " edges\n";
        } else {
            std::cerr << app.help();
            return 2;
        }
    } catch (const qlat::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qlat::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const qlat::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
