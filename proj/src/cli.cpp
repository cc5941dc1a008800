#include "uma/cli.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "uma/error.hpp"
#include "uma/harness.hpp"
#include "uma/judge.hpp"
#include "uma/ledger.hpp"
#include "uma/run_config.hpp"
#include "uma/text.hpp"

namespace uma {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

std::string sanitize_id(std::string_view id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out;
}

// Runs fn(0..count-1) on up to `jobs` workers. Exceptions are routed back
// through on_error; outputs must be written to per-index slots.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, count);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::string out;
    int sessions = 10;
    int samples = 1;
    std::uint64_t seed = 0;
    std::string start = "2024-01-01";
    std::string end = "2024-12-31";
    int quota = 8;
    std::string mode = "deterministic";
    std::string synthesis_url;
    std::string synthesis_model;
    bool diversify = false;
    int jobs = 1;
};

int cmd_generate(const GenerateOptions& opt) {
    DatasetConfig config;
    if (opt.sessions <= 0) throw ValidationError("--sessions must be positive");
    if (opt.samples <= 0) throw ValidationError("--samples must be positive");
    config.n_sessions = opt.sessions;
    config.n_samples = opt.samples;
    config.seed = opt.seed;
    config.per_template_quota = opt.quota;
    auto start = Date::parse(opt.start);
    auto end = Date::parse(opt.end);
    if (!start || !end) throw ValidationError("--start/--end must be YYYY-MM-DD");
    config.start = *start;
    config.end = *end;
    config.diversify = opt.diversify;

    std::unique_ptr<Policy> synthesis;
    if (opt.mode == "llm") {
        if (opt.synthesis_url.empty()) {
            throw ValidationError("llm mode requires --synthesis-url");
        }
        HttpPolicyConfig pc;
        pc.base_url = opt.synthesis_url;
        pc.model = opt.synthesis_model;
        synthesis = std::make_unique<HttpChatPolicy>(pc);
        config.mode = SynthesisMode::Llm;
        config.synthesis_provider = synthesis.get();
    } else if (opt.mode != "deterministic") {
        throw ValidationError("--mode must be deterministic or llm");
    }

    LedgerDataset dataset;
    dataset.samples.resize(static_cast<std::size_t>(config.n_samples));
    parallel_for(config.n_samples, opt.jobs, [&](int i) {
        dataset.samples[static_cast<std::size_t>(i)] = generate_sample(config, i);
    });

    std::ostringstream buffer;
    write_dataset_jsonl(buffer, dataset);
    write_file_atomic(opt.out, buffer.str());

    // Per-template counts.
    std::map<std::string, int> counts;
    int total = 0;
    for (const auto& sample : dataset.samples) {
        for (const auto& q : sample.questions) {
            ++counts[std::string(template_name(q.tmpl))];
            ++total;
        }
    }
    std::cout << "dataset: " << opt.out << "\n";
    std::cout << "samples: " << dataset.samples.size() << ", questions: " << total << "\n";
    for (const auto& [name, count] : counts) {
        std::cout << "  " << name << ": " << count << "\n";
    }

    ordered_json gen_config;
    gen_config["sessions"] = opt.sessions;
    gen_config["samples"] = opt.samples;
    gen_config["seed"] = opt.seed;
    gen_config["start"] = opt.start;
    gen_config["end"] = opt.end;
    gen_config["quota"] = opt.quota;
    gen_config["mode"] = opt.mode;
    gen_config["diversify"] = opt.diversify;

    ordered_json manifest;
    manifest["config_hash"] = hex64(fnv1a64(gen_config.dump()));
    manifest["dataset_hash"] = file_hash_hex(opt.out);
    manifest["artifacts"] = std::vector<std::string>{opt.out};
    manifest["samples"] = dataset.samples.size();
    manifest["questions"] = total;
    write_file_atomic(opt.out + ".manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

std::shared_ptr<const EmbeddingProvider> make_provider(const RunConfig& config) {
    if (config.embedding.kind == "remote") {
        RemoteEmbeddingConfig rc;
        rc.base_url = config.embedding.base_url;
        rc.model = config.embedding.model;
        rc.dimension = config.embedding.dimension;
        return std::make_shared<RemoteEmbedding>(rc);
    }
    return std::make_shared<HashedBowEmbedding>(config.embedding.dimension);
}

OutcomeSpec make_outcome(const RunConfig& config, std::shared_ptr<Policy> judge_policy) {
    OutcomeSpec spec;
    if (config.score_mode == "exact") {
        spec.mode = OutcomeMode::Exact;
    } else if (config.score_mode == "numeric") {
        spec.mode = OutcomeMode::Numeric;
    } else {
        spec.mode = OutcomeMode::Judge;
    }
    if (spec.mode == OutcomeMode::Judge && judge_policy) {
        spec.judge = [judge_policy](const std::string& prediction, const std::string& truth) {
            // The judge callback sees prediction/truth; the question travels
            // via the task built at the call site in cmd_score. Rewards
            // computed inside the runner use this generic default task.
            JudgeTask task;
            task.answer = truth;
            task.prediction = prediction;
            return uma::judge(task, *judge_policy).value;
        };
    }
    return spec;
}

struct ScriptBook {
    std::vector<std::string> default_script;
    std::map<std::string, std::vector<std::string>> per_sample;

    std::vector<std::string> script_for(const std::string& sample_id) const {
        auto it = per_sample.find(sample_id);
        return it != per_sample.end() ? it->second : default_script;
    }
};

ScriptBook load_script_book(const std::string& path) {
    const auto text = read_file(path);
    auto j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("script file is not valid JSON: " + path);
    ScriptBook book;
    if (j.is_array()) {
        book.default_script = j.get<std::vector<std::string>>();
        return book;
    }
    if (j.contains("default")) {
        book.default_script = j["default"].get<std::vector<std::string>>();
    }
    if (j.contains("per_sample")) {
        for (const auto& [id, script] : j["per_sample"].items()) {
            book.per_sample[id] = script.get<std::vector<std::string>>();
        }
    }
    return book;
}

int cmd_run(RunConfig config) {
    config.validate();
    if (config.dataset.empty()) throw ValidationError("run requires --dataset");
    if (config.output_dir.empty()) throw ValidationError("run requires --out");

    const bool uses_embeddings = config.method == "rag" || config.method == "uma";
    if (uses_embeddings && config.embedding.kind == "hashed") {
        std::cerr << "notice: no embedding endpoint configured; using the deterministic "
                     "hashed bag-of-words provider\n";
    }

    const std::string config_hash = config.hash();
    const std::string dataset_hash = file_hash_hex(config.dataset);

    // Generic samples for running; ledger-backed view for the perfect policy.
    auto samples = load_samples_jsonl(config.dataset);
    std::map<std::string, LedgerSample> ledger_by_id;
    if (config.policy.kind == "perfect") {
        std::ifstream in(config.dataset);
        LedgerDataset ds;
        try {
            ds = read_dataset_jsonl(in);
        } catch (const std::exception& e) {
            throw ValidationError(
                std::string("the perfect policy requires a generated dataset with its "
                            "ground-truth ledger: ") +
                e.what());
        }
        for (auto& s : ds.samples) ledger_by_id[s.sample_id] = std::move(s);
    }

    ScriptBook scripts;
    if (config.policy.kind == "scripted") scripts = load_script_book(config.policy.script_file);

    fs::create_directories(config.output_dir);
    const std::string manifest_path = config.output_dir + "/manifest.json";

    RunManifest manifest;
    manifest.config_hash = config_hash;
    manifest.dataset_hash = dataset_hash;
    std::map<std::string, std::size_t> slot;
    if (fs::exists(manifest_path)) {
        auto j = ordered_json::parse(read_file(manifest_path), nullptr, false);
        if (!j.is_discarded()) {
            RunManifest existing = RunManifest::from_json(j);
            if (existing.config_hash != config_hash ||
                existing.dataset_hash != dataset_hash) {
                throw ValidationError(
                    "output directory holds a run with a different config or dataset; "
                    "refusing to mix artifacts");
            }
            manifest = std::move(existing);
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& id = samples[i].sample_id;
        bool known = false;
        for (std::size_t s = 0; s < manifest.samples.size(); ++s) {
            if (manifest.samples[s].sample_id == id) {
                slot[id] = s;
                known = true;
                break;
            }
        }
        if (!known) {
            slot[id] = manifest.samples.size();
            manifest.samples.push_back({id, "pending", "", {}, 0});
        }
    }

    std::mutex manifest_mutex;
    auto save_manifest = [&] {
        write_file_atomic(manifest_path, manifest.to_json().dump(2) + "\n");
    };
    save_manifest();

    HarnessConfig harness;
    harness.driver.budget.max_tokens = config.budget_max_tokens;
    harness.driver.budget.counter = TokenCounter::by_name(config.token_counter);
    harness.driver.limits.max_inner_steps = config.max_inner_steps;
    harness.driver.limits.max_qa_steps = config.max_qa_steps;
    harness.provider = make_provider(config);
    harness.objective = config.objective;
    harness.config_hash = config_hash;

    std::shared_ptr<Policy> judge_policy;
    if (config.score_mode == "judge") {
        HttpPolicyConfig jc;
        jc.base_url = config.judge.base_url;
        jc.model = config.judge.model;
        judge_policy = std::make_shared<HttpChatPolicy>(jc);
    }
    harness.outcome = make_outcome(config, judge_policy);

    auto make_policy = [&](const EpisodeSample& sample) -> std::unique_ptr<Policy> {
        if (config.policy.kind == "http") {
            HttpPolicyConfig pc;
            pc.base_url = config.policy.base_url;
            pc.model = config.policy.model;
            pc.temperature = config.policy.temperature;
            pc.max_tokens = config.policy.max_tokens;
            return std::make_unique<HttpChatPolicy>(pc);
        }
        if (config.policy.kind == "scripted") {
            return std::make_unique<ScriptedPolicy>(scripts.script_for(sample.sample_id));
        }
        auto it = ledger_by_id.find(sample.sample_id);
        if (it == ledger_by_id.end()) {
            throw ValidationError("no ground-truth ledger for sample " + sample.sample_id);
        }
        return std::make_unique<ScriptedPolicy>(perfect_extraction_script(it->second));
    };

    std::atomic<int> failures{0};
    auto run_sample = [&](int index) {
        const auto& sample = samples[static_cast<std::size_t>(index)];
        const std::size_t s = slot.at(sample.sample_id);
        {
            std::lock_guard<std::mutex> lock(manifest_mutex);
            if (manifest.samples[s].status == "done") return;
        }
        const auto t0 = std::chrono::steady_clock::now();
        SampleStatus status{sample.sample_id, "done", "", {}, 0};
        try {
            const std::string safe_id = sanitize_id(sample.sample_id);
            const std::string answers_path =
                config.output_dir + "/answers-" + safe_id + ".jsonl";

            std::ostringstream answers;
            std::ostringstream trajectories;
            std::vector<std::string> bank_paths;

            if (config.method == "uma") {
                PolicyFactory factory = [&](int) { return make_policy(sample); };
                auto result =
                    run_uma_nested(sample, factory, config.memory_rollouts, harness);

                for (std::size_t qi = 0; qi < sample.questions.size(); ++qi) {
                    ordered_json j;
                    j["record"] = "answer";
                    j["method"] = config.method;
                    j["sample_id"] = sample.sample_id;
                    j["question_id"] = sample.sample_id + "/q-" + std::to_string(qi);
                    j["question"] = sample.questions[qi].question;
                    j["truth"] = sample.questions[qi].answer;
                    j["prediction"] = result.qa[0][qi].terminal_answer.value_or("");
                    if (!sample.questions[qi].metadata.empty()) {
                        j["metadata"] = sample.questions[qi].metadata;
                    }
                    j["config_hash"] = config_hash;
                    answers << j.dump() << "\n";
                }
                for (int i = 0; i < config.memory_rollouts; ++i) {
                    for (const auto& traj : result.maintenance[static_cast<std::size_t>(i)]) {
                        write_trajectory(trajectories, traj, std::nullopt, i, std::nullopt);
                    }
                    for (std::size_t qi = 0; qi < result.qa[static_cast<std::size_t>(i)].size();
                         ++qi) {
                        write_trajectory(
                            trajectories, result.qa[static_cast<std::size_t>(i)][qi],
                            result.qa_rewards[static_cast<std::size_t>(i)][qi], i,
                            static_cast<int>(qi));
                    }
                    const std::string bank_path = config.output_dir + "/bank-" + safe_id +
                                                  "-m" + std::to_string(i) + ".json";
                    write_file_atomic(bank_path,
                                      result.banks[static_cast<std::size_t>(i)].snapshot() +
                                          "\n");
                    bank_paths.push_back(bank_path);
                }
                const std::string traj_path =
                    config.output_dir + "/trajectories-" + safe_id + ".jsonl";
                write_file_atomic(traj_path, trajectories.str());
                status.artifacts.push_back(traj_path);
                for (auto& p : bank_paths) status.artifacts.push_back(p);
            } else {
                auto policy = make_policy(sample);
                MetricReport report = config.method == "concat"
                                          ? run_concat_baseline(sample, *policy, harness)
                                          : run_rag_baseline(sample, *policy, harness);
                for (const auto& q : report.per_question) {
                    ordered_json j;
                    j["record"] = "answer";
                    j["method"] = config.method;
                    j["sample_id"] = sample.sample_id;
                    j["question_id"] = q.question_id;
                    j["question"] = q.question;
                    j["truth"] = q.truth;
                    j["prediction"] = q.prediction;
                    if (!q.metadata.empty()) j["metadata"] = q.metadata;
                    j["config_hash"] = config_hash;
                    answers << j.dump() << "\n";
                }
            }

            write_file_atomic(answers_path, answers.str());
            status.artifacts.insert(status.artifacts.begin(), answers_path);
        } catch (const std::exception& e) {
            status.status = "failed";
            status.error = e.what();
            failures.fetch_add(1);
        }
        status.wall_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                               std::chrono::steady_clock::now() - t0)
                                               .count());
        {
            std::lock_guard<std::mutex> lock(manifest_mutex);
            manifest.samples[s] = std::move(status);
            save_manifest();
        }
    };

    parallel_for(static_cast<int>(samples.size()), config.jobs, run_sample);

    int done = 0;
    for (const auto& s : manifest.samples) done += s.status == "done" ? 1 : 0;
    std::cout << "run: " << done << "/" << manifest.samples.size() << " samples done, "
              << failures.load() << " failed\n";
    return failures.load() == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
    std::string run_dir;
    std::string mode = "numeric";
    std::string judge_url;
    std::string judge_model;
    std::string judge_kind = "default";
};

JudgeKind judge_kind_from_name(const std::string& name) {
    if (name == "default") return JudgeKind::Default;
    if (name == "temporal") return JudgeKind::Temporal;
    if (name == "knowledge_update") return JudgeKind::KnowledgeUpdate;
    if (name == "preference") return JudgeKind::Preference;
    if (name == "abstention") return JudgeKind::Abstention;
    throw ValidationError("unknown judge kind: " + name);
}

int cmd_score(const ScoreOptions& opt) {
    if (opt.mode != "numeric" && opt.mode != "exact" && opt.mode != "judge") {
        throw ValidationError("--mode must be numeric, exact, or judge");
    }
    if (opt.mode == "judge" && opt.judge_url.empty()) {
        throw ValidationError("judge mode requires --judge-url");
    }
    const std::string manifest_path = opt.run_dir + "/manifest.json";
    if (!fs::exists(manifest_path)) {
        throw ValidationError("no manifest.json in " + opt.run_dir);
    }
    auto mj = ordered_json::parse(read_file(manifest_path), nullptr, false);
    if (mj.is_discarded()) throw ValidationError("manifest.json is not valid JSON");
    const RunManifest manifest = RunManifest::from_json(mj);
    for (const auto& s : manifest.samples) {
        if (s.status != "done") {
            throw ValidationError("sample " + s.sample_id + " is " + s.status +
                                  "; rerun before scoring");
        }
    }

    std::vector<std::string> answer_files;
    for (const auto& entry : fs::directory_iterator(opt.run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("answers-", 0) == 0 && name.size() > 6 &&
            name.substr(name.size() - 6) == ".jsonl") {
            answer_files.push_back(entry.path().string());
        }
    }
    std::sort(answer_files.begin(), answer_files.end());
    if (answer_files.empty()) throw ValidationError("no answer artifacts in " + opt.run_dir);

    std::shared_ptr<Policy> judge_policy;
    if (opt.mode == "judge") {
        HttpPolicyConfig jc;
        jc.base_url = opt.judge_url;
        jc.model = opt.judge_model;
        judge_policy = std::make_shared<HttpChatPolicy>(jc);
    }
    const JudgeKind kind = judge_kind_from_name(opt.judge_kind);

    MetricReport report;
    std::string method = "?";
    for (const auto& path : answer_files) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto j = ordered_json::parse(line, nullptr, false);
            if (j.is_discarded()) throw ValidationError("bad answer record in " + path);
            const std::string hash = j.value("config_hash", "");
            if (report.config_hash.empty()) {
                report.config_hash = hash;
            } else if (report.config_hash != hash) {
                throw ValidationError("mixed config hashes across answer artifacts");
            }
            method = j.value("method", method);

            QuestionRecord record;
            record.question = j.value("question", "");
            record.answer = j.value("truth", "");
            if (j.contains("metadata")) record.metadata = j["metadata"];

            OutcomeSpec outcome;
            if (opt.mode == "exact") {
                outcome.mode = OutcomeMode::Exact;
            } else if (opt.mode == "numeric") {
                outcome.mode = OutcomeMode::Numeric;
            } else {
                outcome.mode = OutcomeMode::Judge;
                const std::string question = record.question;
                outcome.judge = [&, question](const std::string& prediction,
                                              const std::string& truth) {
                    JudgeTask task;
                    task.kind = kind;
                    task.question = question;
                    task.answer = truth;
                    task.prediction = prediction;
                    return judge(task, *judge_policy).value;
                };
            }
            report.per_question.push_back(score_question(j.value("question_id", ""), record,
                                                         j.value("prediction", ""), outcome));
        }
    }
    report.recompute_aggregates();

    std::ostringstream body;
    report.write_jsonl(body);
    write_file_atomic(opt.run_dir + "/report.jsonl", body.str());
    const std::string table = report.summary_table(method + "/" + opt.mode);
    write_file_atomic(opt.run_dir + "/summary.txt", table);
    std::cout << table;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// advantages
// ---------------------------------------------------------------------------

struct AdvantagesOptions {
    std::string run_dir;
    std::string out;
    std::string grouping = "stratified";
    double epsilon = 0.2;
    double beta = 0.001;
    double lambda_tool = 0.1;
    double sigma_floor = 1e-8;
};

int cmd_advantages(const AdvantagesOptions& opt) {
    if (opt.grouping != "stratified" && opt.grouping != "global") {
        throw ValidationError("--grouping must be stratified or global");
    }
    std::vector<std::string> traj_files;
    for (const auto& entry : fs::directory_iterator(opt.run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trajectories-", 0) == 0) traj_files.push_back(entry.path().string());
    }
    std::sort(traj_files.begin(), traj_files.end());
    if (traj_files.empty()) {
        throw ValidationError("no trajectory artifacts in " + opt.run_dir);
    }

    ObjectiveConfig config;
    config.epsilon = opt.epsilon;
    config.beta = opt.beta;
    config.lambda_tool = opt.lambda_tool;
    config.sigma_floor = opt.sigma_floor;

    std::vector<ExportRecord> records;
    for (const auto& path : traj_files) {
        std::ifstream in(path);
        auto logged = read_trajectory_log(in);

        // Group rows by base episode (strip the "/m-<i>" rollout suffix).
        auto base_of = [](const std::string& episode_id) {
            const auto pos = episode_id.rfind("/m-");
            return pos == std::string::npos ? episode_id : episode_id.substr(0, pos);
        };
        std::map<std::string, std::vector<const LoggedTrajectory*>> groups;
        for (const auto& lt : logged) {
            groups[base_of(lt.trajectory.episode_id)].push_back(&lt);
        }

        for (const auto& [base, items] : groups) {
            int n = 0, m = 0;
            for (const auto* lt : items) {
                n = std::max(n, lt->memory_index + 1);
                if (lt->question_index) m = std::max(m, *lt->question_index + 1);
            }
            if (n == 0 || m == 0) {
                throw ValidationError("group " + base + " has no complete N x M grid");
            }
            RewardMatrix rewards = RewardMatrix::zeros(n, m);
            std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n),
                                                std::vector<bool>(static_cast<std::size_t>(m),
                                                                  false));
            for (const auto* lt : items) {
                if (!lt->question_index) continue;
                if (!lt->rewards) {
                    throw ValidationError("QA trajectory in " + base + " lacks rewards");
                }
                rewards.at(lt->memory_index, *lt->question_index) = lt->rewards->total;
                seen[static_cast<std::size_t>(lt->memory_index)]
                    [static_cast<std::size_t>(*lt->question_index)] = true;
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) {
                    if (!seen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                        throw ValidationError("group " + base + " is missing cell (" +
                                              std::to_string(i) + "," + std::to_string(j) +
                                              ") of its N x M grid");
                    }
                }
            }

            std::vector<double> a_mem;
            RewardMatrix a_qa;
            if (opt.grouping == "stratified") {
                a_mem = memory_advantages(rewards, config.sigma_floor);
                a_qa = qa_advantages(rewards, config.sigma_floor);
            } else {
                a_qa = global_group_advantages(rewards, config.sigma_floor);
                // Memory rows take the mean of their row's globally-normalized
                // QA advantages (the flat-pool analog of the future-utility
                // signal).
                a_mem.assign(static_cast<std::size_t>(n), 0.0);
                for (int i = 0; i < n; ++i) {
                    double sum = 0.0;
                    for (int j = 0; j < m; ++j) sum += a_qa.at(i, j);
                    a_mem[static_cast<std::size_t>(i)] = sum / static_cast<double>(m);
                }
            }

            for (const auto* lt : items) {
                ExportRecord rec;
                rec.trajectory_id = lt->trajectory.episode_id + "/" + lt->trajectory.unit_id;
                rec.role = lt->question_index ? "qa" : "memory";
                rec.advantage =
                    lt->question_index
                        ? a_qa.at(lt->memory_index, *lt->question_index)
                        : a_mem[static_cast<std::size_t>(lt->memory_index)];
                try {
                    auto tokens = gather_logprobs(lt->trajectory);
                    rec.objective_terms = objective_terms(tokens, rec.advantage, config);
                    rec.tokens = std::move(tokens);
                } catch (const MissingLogprobs&) {
                    // logprob-free runs export advantages only
                }
                records.push_back(std::move(rec));
            }
        }
    }

    std::ostringstream body;
    write_training_batch(body, records);
    write_file_atomic(opt.out, body.str());
    std::cout << "advantages: " << records.size() << " trajectory records -> " << opt.out
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

int cmd_inspect(const std::string& path) {
    const auto text = read_file(path);

    // Whole-file JSON object: bank snapshot or other single document.
    auto whole = ordered_json::parse(text, nullptr, false);
    if (!whole.is_discarded() && whole.is_object()) {
        if (whole.contains("core") && whole.contains("entries")) {
            std::cout << "bank snapshot: " << whole["entries"].size() << " entries\n";
            std::cout << "core: " << whole["core"].get<std::string>() << "\n";
            for (const auto& e : whole["entries"]) {
                std::cout << "  " << e["key"].get<std::string>() << " = "
                          << e["value"].get<std::string>() << "\n";
            }
            return kExitOk;
        }
        std::cout << whole.dump(2) << "\n";
        return kExitOk;
    }

    // Line-delimited records.
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        const std::string record = j.value("record", "");
        if (record == "step") {
            std::cout << j.value("episode_id", "") << " " << j.value("unit_id", "") << " #"
                      << j.value("step_index", 0) << " "
                      << (j.contains("parsed_tool") && j["parsed_tool"].is_string()
                              ? j["parsed_tool"].get<std::string>()
                              : std::string("<invalid>"))
                      << (j.value("valid", false) ? "" : " [invalid]") << "\n";
        } else if (record == "terminal") {
            std::cout << j.value("episode_id", "") << " " << j.value("unit_id", "")
                      << " terminal";
            if (j.contains("terminal_answer")) {
                std::cout << " answer=\"" << j["terminal_answer"].get<std::string>() << "\"";
            }
            if (j.contains("rewards")) {
                std::cout << " total=" << j["rewards"].value("total", 0.0);
            }
            std::cout << "\n";
        } else if (j.contains("sample_id") && j.contains("sessions")) {
            std::cout << j["sample_id"].get<std::string>() << ": "
                      << j["sessions"].size() << " sessions, " << j["ledger"].size()
                      << " transactions, " << j["questions"].size() << " questions\n";
        } else {
            std::cout << j.dump() << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"memory-agent experiment harness"};
    app.require_subcommand(1);

    // generate
    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "generate a synthetic ledger dataset");
    generate->add_option("--out", gen.out, "output dataset file (.jsonl)")->required();
    generate->add_option("--sessions", gen.sessions, "sessions per sample");
    generate->add_option("--samples", gen.samples, "number of samples");
    generate->add_option("--seed", gen.seed, "global seed");
    generate->add_option("--start", gen.start, "timeline start (YYYY-MM-DD)");
    generate->add_option("--end", gen.end, "timeline end (YYYY-MM-DD)");
    generate->add_option("--quota", gen.quota, "question quota per template");
    generate->add_option("--mode", gen.mode, "deterministic | llm");
    generate->add_option("--synthesis-url", gen.synthesis_url, "llm synthesis endpoint");
    generate->add_option("--synthesis-model", gen.synthesis_model, "llm synthesis model");
    generate->add_flag("--diversify", gen.diversify, "paraphrase questions (llm mode)");
    generate->add_option("--jobs", gen.jobs, "parallel workers");

    // run
    RunConfig run_config;
    std::string run_config_path;
    auto* run = app.add_subcommand("run", "execute a method over a dataset");
    run->add_option("--config", run_config_path, "config file (JSON)");
    auto* o_dataset = run->add_option("--dataset", run_config.dataset, "dataset file");
    auto* o_method = run->add_option("--method", run_config.method, "uma | concat | rag");
    auto* o_out = run->add_option("--out", run_config.output_dir, "output directory");
    auto* o_seed = run->add_option("--seed", run_config.seed, "seed");
    auto* o_jobs = run->add_option("--jobs", run_config.jobs, "parallel workers");
    auto* o_policy =
        run->add_option("--policy", run_config.policy.kind, "http | scripted | perfect");
    auto* o_policy_url = run->add_option("--policy-url", run_config.policy.base_url, "");
    auto* o_policy_model = run->add_option("--policy-model", run_config.policy.model, "");
    auto* o_script = run->add_option("--script", run_config.policy.script_file, "");
    auto* o_emb = run->add_option("--embedding", run_config.embedding.kind, "hashed | remote");
    auto* o_emb_url = run->add_option("--embedding-url", run_config.embedding.base_url, "");
    auto* o_emb_model = run->add_option("--embedding-model", run_config.embedding.model, "");
    auto* o_budget = run->add_option("--budget", run_config.budget_max_tokens, "");
    auto* o_counter = run->add_option("--counter", run_config.token_counter, "words | unit");
    auto* o_inner = run->add_option("--max-inner-steps", run_config.max_inner_steps, "");
    auto* o_qa = run->add_option("--max-qa-steps", run_config.max_qa_steps, "");
    auto* o_mode = run->add_option("--score-mode", run_config.score_mode, "");
    auto* o_rollouts = run->add_option("--rollouts", run_config.memory_rollouts, "");

    // score
    ScoreOptions score;
    auto* score_cmd = app.add_subcommand("score", "score a finished run");
    score_cmd->add_option("--run", score.run_dir, "run directory")->required();
    score_cmd->add_option("--mode", score.mode, "numeric | exact | judge");
    score_cmd->add_option("--judge-url", score.judge_url, "judge endpoint");
    score_cmd->add_option("--judge-model", score.judge_model, "judge model");
    score_cmd->add_option("--judge-kind", score.judge_kind,
                          "default | temporal | knowledge_update | preference | abstention");

    // advantages
    AdvantagesOptions adv;
    auto* adv_cmd = app.add_subcommand("advantages", "export grouped advantages");
    adv_cmd->add_option("--run", adv.run_dir, "run directory")->required();
    adv_cmd->add_option("--out", adv.out, "export file")->required();
    adv_cmd->add_option("--grouping", adv.grouping, "stratified | global");
    adv_cmd->add_option("--epsilon", adv.epsilon, "clip radius");
    adv_cmd->add_option("--beta", adv.beta, "KL coefficient");
    adv_cmd->add_option("--lambda-tool", adv.lambda_tool, "tool reward weight");

    // inspect
    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "pretty-print an artifact");
    inspect->add_option("--file", inspect_path, "artifact file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (run->parsed()) {
            if (!run_config_path.empty()) {
                // The file supplies the base; explicit flags override it.
                RunConfig merged = load_run_config(run_config_path);
                if (*o_dataset) merged.dataset = run_config.dataset;
                if (*o_method) merged.method = run_config.method;
                if (*o_out) merged.output_dir = run_config.output_dir;
                if (*o_seed) merged.seed = run_config.seed;
                if (*o_jobs) merged.jobs = run_config.jobs;
                if (*o_policy) merged.policy.kind = run_config.policy.kind;
                if (*o_policy_url) merged.policy.base_url = run_config.policy.base_url;
                if (*o_policy_model) merged.policy.model = run_config.policy.model;
                if (*o_script) merged.policy.script_file = run_config.policy.script_file;
                if (*o_emb) merged.embedding.kind = run_config.embedding.kind;
                if (*o_emb_url) merged.embedding.base_url = run_config.embedding.base_url;
                if (*o_emb_model) merged.embedding.model = run_config.embedding.model;
                if (*o_budget) merged.budget_max_tokens = run_config.budget_max_tokens;
                if (*o_counter) merged.token_counter = run_config.token_counter;
                if (*o_inner) merged.max_inner_steps = run_config.max_inner_steps;
                if (*o_qa) merged.max_qa_steps = run_config.max_qa_steps;
                if (*o_mode) merged.score_mode = run_config.score_mode;
                if (*o_rollouts) merged.memory_rollouts = run_config.memory_rollouts;
                run_config = merged;
            }
            return cmd_run(run_config);
        }
        if (score_cmd->parsed()) return cmd_score(score);
        if (adv_cmd->parsed()) return cmd_advantages(adv);
        if (inspect->parsed()) return cmd_inspect(inspect_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace uma
