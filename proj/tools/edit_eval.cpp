// edit-eval: run / inspect / trace over MQuAKE-format datasets.
//
// Exit codes: 0 ok, 1 usage, 2 dataset error, 3 oracle configuration error.

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "struedit/struedit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataset = 2;
constexpr int kExitOracle = 3;

struct OracleChoice {
    std::string spec = "remote";  // "scripted:<path>" or "remote"
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    bool scripted() const { return spec.rfind("scripted:", 0) == 0; }
};

std::unique_ptr<struedit::Oracle> make_oracle(const OracleChoice& choice) {
    if (choice.scripted()) {
        auto oracle = std::make_unique<struedit::ScriptedOracle>(
            struedit::load_scripted_oracle(choice.spec.substr(9)));
        return oracle;
    }
    if (choice.spec != "remote") {
        throw struedit::Error(struedit::FailureReason::oracle_unavailable,
                              "--oracle must be scripted:<fixture> or remote");
    }
    struedit::OracleConfig config;
    config.endpoint_url = choice.endpoint;
    config.model_name = choice.model;
    return std::make_unique<struedit::RemoteOracle>(config);
}

struedit::PromptTemplateSet load_templates(const std::string& prompts_dir) {
    if (prompts_dir.empty()) return struedit::PromptTemplateSet::defaults();
    return struedit::load_prompt_templates(prompts_dir);
}

void add_run_options(CLI::App* cmd, std::string& dataset, std::string& system,
                     std::string& memory, OracleChoice& oracle, std::string& extraction,
                     std::string& matcher, std::size_t& top_k, std::string& fanout,
                     std::size_t& concurrency, std::uint64_t& seed, std::string& prompts_dir,
                     bool& full_includes_originals, std::size_t& retrieval_k) {
    cmd->add_option("--dataset", dataset, "MQuAKE-format JSON dataset")->required();
    cmd->add_option("--system", system, "struedit|ice")
        ->check(CLI::IsMember({"struedit", "ice"}));
    cmd->add_option("--memory", memory, "relevant|full|count:<n>");
    cmd->add_option("--oracle", oracle.spec, "scripted:<fixture>|remote");
    cmd->add_option("--endpoint", oracle.endpoint, "chat-completions endpoint URL");
    cmd->add_option("--model", oracle.model, "model name for remote oracle");
    cmd->add_option("--extraction", extraction, "llm|det")
        ->check(CLI::IsMember({"llm", "det"}));
    cmd->add_option("--matcher", matcher, "oracle|lexical")
        ->check(CLI::IsMember({"oracle", "lexical"}));
    cmd->add_option("--top-k", top_k, "entity prefilter size");
    cmd->add_option("--fanout", fanout, "strict|lenient")
        ->check(CLI::IsMember({"strict", "lenient"}));
    cmd->add_option("--concurrency", concurrency, "cases in flight");
    cmd->add_option("--seed", seed, "seed for sampling");
    cmd->add_option("--prompts", prompts_dir, "prompt template directory");
    cmd->add_flag("--full-includes-originals,!--no-full-includes-originals",
                  full_includes_originals,
                  "include every case's original triples in full memory");
    cmd->add_option("--retrieval-k", retrieval_k, "facts retrieved per baseline question");
}

struedit::HarnessConfig make_harness_config(const std::string& system, const std::string& memory,
                                            const std::string& extraction,
                                            const std::string& matcher, std::size_t top_k,
                                            const std::string& fanout, std::size_t concurrency,
                                            std::uint64_t seed, bool full_includes_originals,
                                            std::size_t retrieval_k) {
    struedit::HarnessConfig config;
    config.system = system == "ice" ? struedit::SystemKind::ice_baseline
                                    : struedit::SystemKind::struedit;
    if (memory == "relevant") {
        config.memory_mode = struedit::MemoryMode::relevant_only;
    } else if (memory == "full") {
        config.memory_mode = struedit::MemoryMode::full;
    } else if (memory.rfind("count:", 0) == 0) {
        config.memory_mode = struedit::MemoryMode::fixed_count;
        config.fixed_count = static_cast<std::size_t>(std::stoull(memory.substr(6)));
    } else {
        throw CLI::ValidationError("--memory", "expected relevant|full|count:<n>");
    }
    config.full_includes_originals = full_includes_originals;
    config.concurrency_limit = concurrency;
    config.seed = seed;
    config.retrieval_k = retrieval_k;
    config.pipeline.extraction_mode = extraction == "det"
                                          ? struedit::ExtractionMode::deterministic
                                          : struedit::ExtractionMode::llm;
    config.pipeline.matcher.strategy = matcher == "lexical" ? struedit::MatchStrategy::lexical
                                                            : struedit::MatchStrategy::oracle;
    config.pipeline.matcher.prefilter_top_k = top_k;
    config.pipeline.fanout_policy = fanout == "lenient" ? struedit::FanoutPolicy::lenient
                                                        : struedit::FanoutPolicy::strict;
    config.validate();
    return config;
}

int run_command(const std::string& dataset_path, const struedit::HarnessConfig& config,
                const OracleChoice& oracle_choice, const std::string& prompts_dir,
                const std::string& out_path) {
    struedit::DatasetLoadResult loaded = struedit::load_mquake(dataset_path);
    if (loaded.cases.empty()) {
        std::cerr << "error: dataset has no usable cases (" << loaded.skipped << " skipped)\n";
        return kExitDataset;
    }
    std::unique_ptr<struedit::Oracle> oracle = make_oracle(oracle_choice);
    struedit::PromptTemplateSet templates = load_templates(prompts_dir);

    struedit::ClockFactory clock_factory;
    if (oracle_choice.scripted()) {
        // Simulated time keeps scripted runs byte-reproducible.
        clock_factory = [] { return std::make_unique<struedit::SimulatedClock>(1e-3); };
    }
    struedit::EvaluationReport report =
        struedit::run_evaluation(loaded.cases, config, *oracle, templates, clock_factory);

    nlohmann::json config_echo = struedit::harness_config_json(config);
    config_echo["dataset"] = dataset_path;
    config_echo["oracle"] = oracle_choice.scripted() ? oracle_choice.spec : "remote";
    if (!oracle_choice.scripted()) config_echo["model"] = oracle_choice.model;
    nlohmann::json doc = struedit::report_to_json(report, std::move(config_echo));

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitDataset;
    }
    out << doc.dump(2) << "\n";

    std::cout << "cases: " << report.case_count << "  accuracy: " << report.overall_accuracy
              << "  oracle calls/case: " << report.oracle_calls_mean << "\n"
              << "report: " << out_path << "\n";
    return kExitOk;
}

int inspect_command(const std::string& dataset_path) {
    struedit::DatasetLoadResult loaded = struedit::load_mquake(dataset_path);
    std::cout << "dataset: " << dataset_path << "\n";
    std::cout << "cases: " << loaded.cases.size() << "\n";
    std::cout << "skipped: " << loaded.skipped << "\n";
    for (const std::string& reason : loaded.skip_reasons) {
        std::cout << "  skip " << reason << "\n";
    }
    std::cout << "hop_histogram: {";
    bool first = true;
    for (const auto& [hops, count] : struedit::hop_histogram(loaded.cases)) {
        if (!first) std::cout << ", ";
        std::cout << hops << ": " << count;
        first = false;
    }
    std::cout << "}\n";
    std::size_t questions = 0;
    std::size_t rewrites = 0;
    for (const struedit::MultiHopCase& item : loaded.cases) {
        questions += item.questions.size();
        rewrites += item.rewrites.size();
    }
    std::cout << "questions: " << questions << "\n";
    std::cout << "rewrites: " << rewrites << "\n";
    return kExitOk;
}

int trace_command(const std::string& dataset_path, const std::string& case_id,
                  const struedit::HarnessConfig& config, const OracleChoice& oracle_choice,
                  const std::string& prompts_dir) {
    struedit::DatasetLoadResult loaded = struedit::load_mquake(dataset_path);
    std::size_t focus = loaded.cases.size();
    for (std::size_t i = 0; i < loaded.cases.size(); ++i) {
        if (loaded.cases[i].case_id == case_id) {
            focus = i;
            break;
        }
    }
    if (focus == loaded.cases.size()) {
        std::cerr << "error: case '" << case_id << "' not found in " << dataset_path << "\n";
        return kExitDataset;
    }

    std::unique_ptr<struedit::Oracle> oracle = make_oracle(oracle_choice);
    struedit::PromptTemplateSet templates = load_templates(prompts_dir);
    struedit::TranscriptRecorder recorder(*oracle);
    std::unique_ptr<struedit::Clock> clock;
    if (oracle_choice.scripted()) clock = std::make_unique<struedit::SimulatedClock>(1e-3);

    struedit::CaseResult result =
        struedit::run_case(loaded.cases, focus, config, recorder, templates,
                           clock ? *clock : struedit::steady_clock());

    std::cout << "case: " << result.case_id << " (" << result.hop_count << " hops)\n";
    std::cout << "gold: " << loaded.cases[focus].gold_new_answer << "\n";
    std::cout << "predicted: " << result.predicted << "\n";
    std::cout << "correct: " << (result.correct ? "yes" : "no") << "\n";
    if (result.failure) std::cout << "failure: " << to_string(*result.failure) << "\n";
    std::cout << "oracle_calls: " << result.oracle_calls << "\n";
    for (const struedit::PipelineAnswer& attempt : result.attempts) {
        std::cout << "-- attempt --\n";
        if (!attempt.chain.raw_text.empty()) {
            std::cout << "chain:\n" << attempt.chain.raw_text << "\n";
        }
        if (!attempt.skeleton.relations.empty()) {
            std::cout << "skeleton: " << render_skeleton_text(attempt.skeleton) << "\n";
        }
        for (const struedit::FactTriple& hop : attempt.path.hops) {
            std::cout << "hop: (" << hop.subject.display << " ; " << hop.relation.display
                      << " ; " << hop.object.display << ")\n";
        }
        for (const struedit::StageTrace& stage : attempt.trace) {
            std::cout << "stage " << stage.stage << ": " << stage.duration_seconds << "s, "
                      << stage.oracle_calls << " call(s)\n";
        }
    }
    std::cout << "-- transcript --\n";
    for (const auto& [request, response] : recorder.transcript()) {
        std::cout << ">> " << request.user_text << "\n<< " << response.text << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structural knowledge-editing evaluation"};
    app.require_subcommand(1);

    std::string dataset;
    std::string system = "struedit";
    std::string memory = "relevant";
    OracleChoice oracle;
    std::string extraction = "llm";
    std::string matcher = "oracle";
    std::size_t top_k = 20;
    std::string fanout = "strict";
    std::size_t concurrency = 1;
    std::uint64_t seed = 0;
    std::string prompts_dir;
    bool full_includes_originals = true;
    std::size_t retrieval_k = 4;
    std::string out_path = "report.json";
    std::string case_id;

    CLI::App* run = app.add_subcommand("run", "evaluate a dataset and write a report");
    add_run_options(run, dataset, system, memory, oracle, extraction, matcher, top_k, fanout,
                    concurrency, seed, prompts_dir, full_includes_originals, retrieval_k);
    run->add_option("--out", out_path, "report output path");

    CLI::App* inspect = app.add_subcommand("inspect", "summarize dataset ingestion");
    inspect->add_option("--dataset", dataset, "MQuAKE-format JSON dataset")->required();

    CLI::App* trace = app.add_subcommand("trace", "run one case with a transcript dump");
    add_run_options(trace, dataset, system, memory, oracle, extraction, matcher, top_k, fanout,
                    concurrency, seed, prompts_dir, full_includes_originals, retrieval_k);
    trace->add_option("--case", case_id, "case_id to trace")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (inspect->parsed()) return inspect_command(dataset);
        struedit::HarnessConfig config =
            make_harness_config(system, memory, extraction, matcher, top_k, fanout, concurrency,
                                seed, full_includes_originals, retrieval_k);
        if (run->parsed()) {
            return run_command(dataset, config, oracle, prompts_dir, out_path);
        }
        return trace_command(dataset, case_id, config, oracle, prompts_dir);
    } catch (const struedit::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        switch (error.reason()) {
            case struedit::FailureReason::dataset_unreadable:
            case struedit::FailureReason::schema_mismatch:
                return kExitDataset;
            case struedit::FailureReason::oracle_unavailable:
            case struedit::FailureReason::oracle_timeout:
            case struedit::FailureReason::script_miss:
                return kExitOracle;
            default:
                return 1;
        }
    } catch (const CLI::ValidationError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
