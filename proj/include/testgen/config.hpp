#pragma once

// Sectioned key-value run configuration. Plain text, reviewable and diffable;
// secrets stay in environment variables referenced by name.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "testgen/coverage_map.hpp"
#include "testgen/generation.hpp"
#include "testgen/metrics.hpp"
#include "testgen/util.hpp"

namespace testgen {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

class Config {
public:
    static Config parse_text(std::string_view text) {
        Config cfg;
        cfg.raw_ = std::string(text);
        std::string section;
        int lineno = 0;
        for (const std::string& raw_line : split_lines(text)) {
            ++lineno;
            std::string line = trim(raw_line);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
                }
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            }
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            }
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) {
            throw ConfigError("file not found: " + path.string());
        }
        return parse_text(read_file(path));
    }

    std::optional<std::string> get(std::string_view section, std::string_view key) const {
        auto it = values_.find(std::string(section) + "." + std::string(key));
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string get_or(std::string_view section, std::string_view key,
                       std::string_view fallback) const {
        auto v = get(section, key);
        return v ? *v : std::string(fallback);
    }

    std::string require(std::string_view section, std::string_view key) const {
        auto v = get(section, key);
        if (!v || v->empty()) {
            throw ConfigError("missing required key [" + std::string(section) + "] " +
                              std::string(key));
        }
        return *v;
    }

    double get_double(std::string_view section, std::string_view key, double fallback) const {
        auto v = get(section, key);
        if (!v || v->empty()) return fallback;
        try {
            return std::stod(*v);
        } catch (const std::exception&) {
            throw ConfigError("[" + std::string(section) + "] " + std::string(key) +
                              " is not a number: " + *v);
        }
    }

    std::uint64_t hash() const { return fnv1a64(raw_); }
    const std::string& raw() const { return raw_; }

private:
    std::map<std::string, std::string> values_;
    std::string raw_;
};

struct RunConfig {
    std::string project_name;
    std::filesystem::path project_root;
    std::string source_glob = "src/main/java/**/*.java";
    std::string test_glob = "src/test/java/**/*.java";
    std::filesystem::path coverage_dir;
    std::vector<std::string> coverage_exclude_globs = {"src/test/**"};

    double split_ratio = 0.2;
    std::uint64_t seed = 0;
    NameMatchMode match_mode = NameMatchMode::Token;
    bool include_private_methods = true;

    BackendConfig backend;
    std::string compile_adapter;
    double compile_adapter_timeout_sec = 120.0;
    std::string run_adapter;
    double run_adapter_timeout_sec = 120.0;

    CodeBleuConfig metrics;
    CorpusAggregation metrics_aggregation = CorpusAggregation::SentenceMean;
    std::filesystem::path metrics_candidates_file;  // optional paired-file mode
    std::filesystem::path metrics_references_file;
    std::vector<std::filesystem::path> report_extra_rows;
    std::filesystem::path kill_matrix_csv;       // optional adequacy inputs
    std::filesystem::path major_kill_map;        // Major-style TestNo,MutantNo pairs
    std::filesystem::path major_cov_map;
    long major_total_mutants = 0;
    std::filesystem::path model_coverage_dir;    // clover reports of generated tests
    std::filesystem::path output_dir = "out";

    std::uint64_t config_hash = 0;

    static RunConfig from(const Config& cfg, const std::filesystem::path& config_dir) {
        RunConfig rc;
        rc.project_name = cfg.get_or("project", "name", "project");
        std::filesystem::path root = cfg.require("project", "root");
        rc.project_root = root.is_absolute() ? root : config_dir / root;
        rc.source_glob = cfg.get_or("project", "source_glob", rc.source_glob);
        rc.test_glob = cfg.get_or("project", "test_glob", rc.test_glob);

        std::filesystem::path cov = cfg.get_or("coverage", "report_dir", "coverage");
        rc.coverage_dir = cov.is_absolute() ? cov : rc.project_root / cov;
        if (auto ex = cfg.get("coverage", "exclude_globs"); ex && !ex->empty()) {
            rc.coverage_exclude_globs.clear();
            for (const std::string& g : split_lines(replace_all(*ex, ",", "\n"))) {
                std::string t = trim(g);
                if (!t.empty()) rc.coverage_exclude_globs.push_back(t);
            }
        }

        rc.split_ratio = cfg.get_double("dataset", "ratio", 0.2);
        std::string seed_text = cfg.require("dataset", "seed");
        try {
            rc.seed = std::stoull(seed_text);
        } catch (const std::exception&) {
            throw ConfigError("[dataset] seed is not an integer: " + seed_text);
        }
        std::string mode = cfg.get_or("dataset", "match_mode", "token");
        if (mode == "token") {
            rc.match_mode = NameMatchMode::Token;
        } else if (mode == "substring") {
            rc.match_mode = NameMatchMode::Substring;
        } else if (mode == "prefix") {
            rc.match_mode = NameMatchMode::Prefix;
        } else {
            throw ConfigError("[dataset] match_mode must be token|substring|prefix");
        }
        rc.include_private_methods =
            cfg.get_or("dataset", "include_private_methods", "true") != "false";

        std::string backend = cfg.get_or("generation", "backend", "stub");
        if (backend == "stub") {
            rc.backend.kind = BackendKind::Stub;
        } else if (backend == "command") {
            rc.backend.kind = BackendKind::Command;
            rc.backend.command = cfg.require("generation", "command");
        } else if (backend == "http") {
            rc.backend.kind = BackendKind::Http;
            rc.backend.endpoint = cfg.require("generation", "endpoint");
        } else {
            throw ConfigError("[generation] backend must be stub|command|http");
        }
        rc.backend.timeout_sec = cfg.get_double("generation", "timeout_sec", 30.0);
        rc.backend.max_output_tokens =
            static_cast<int>(cfg.get_double("generation", "max_output_tokens", 256));
        rc.backend.retries = static_cast<int>(cfg.get_double("generation", "retries", 0));
        rc.backend.auth_env = cfg.get_or("generation", "auth_env", "");
        rc.backend.requests_per_sec = cfg.get_double("generation", "requests_per_sec", 1.0);
        rc.backend.max_concurrency =
            static_cast<int>(cfg.get_double("generation", "max_concurrency", 1));

        rc.compile_adapter = cfg.get_or("adapters", "compile", "");
        rc.compile_adapter_timeout_sec = cfg.get_double("adapters", "compile_timeout_sec", 120.0);
        rc.run_adapter = cfg.get_or("adapters", "run", "");
        rc.run_adapter_timeout_sec = cfg.get_double("adapters", "run_timeout_sec", 120.0);

        rc.metrics.keyword_weight = cfg.get_double("metrics", "keyword_weight", 4.0);
        rc.metrics.alpha = cfg.get_double("metrics", "alpha", 0.25);
        rc.metrics.beta = cfg.get_double("metrics", "beta", 0.25);
        rc.metrics.gamma = cfg.get_double("metrics", "gamma", 0.25);
        rc.metrics.delta = cfg.get_double("metrics", "delta", 0.25);
        std::string agg = cfg.get_or("metrics", "aggregate", "sentence");
        if (agg == "sentence") {
            rc.metrics_aggregation = CorpusAggregation::SentenceMean;
        } else if (agg == "corpus") {
            rc.metrics_aggregation = CorpusAggregation::CorpusPooled;
        } else {
            throw ConfigError("[metrics] aggregate must be sentence|corpus");
        }
        if (auto cand = cfg.get("metrics", "candidates_file"); cand && !cand->empty()) {
            std::filesystem::path p = *cand;
            rc.metrics_candidates_file = p.is_absolute() ? p : config_dir / p;
        }
        if (auto ref = cfg.get("metrics", "references_file"); ref && !ref->empty()) {
            std::filesystem::path p = *ref;
            rc.metrics_references_file = p.is_absolute() ? p : config_dir / p;
        }

        if (auto rows = cfg.get("report", "extra_rows"); rows && !rows->empty()) {
            for (const std::string& p : split_lines(replace_all(*rows, ",", "\n"))) {
                std::string t = trim(p);
                if (!t.empty()) {
                    std::filesystem::path path = t;
                    rc.report_extra_rows.push_back(path.is_absolute() ? path : config_dir / path);
                }
            }
        }
        if (auto km = cfg.get("adequacy", "kill_matrix"); km && !km->empty()) {
            std::filesystem::path path = *km;
            rc.kill_matrix_csv = path.is_absolute() ? path : config_dir / path;
        }
        if (auto km = cfg.get("adequacy", "major_kill_map"); km && !km->empty()) {
            std::filesystem::path path = *km;
            rc.major_kill_map = path.is_absolute() ? path : config_dir / path;
            rc.major_total_mutants =
                static_cast<long>(cfg.get_double("adequacy", "major_total_mutants", 0));
            if (auto cm = cfg.get("adequacy", "major_cov_map"); cm && !cm->empty()) {
                std::filesystem::path cov_path = *cm;
                rc.major_cov_map = cov_path.is_absolute() ? cov_path : config_dir / cov_path;
            }
        }
        if (auto mc = cfg.get("adequacy", "model_coverage_dir"); mc && !mc->empty()) {
            std::filesystem::path path = *mc;
            rc.model_coverage_dir = path.is_absolute() ? path : config_dir / path;
        }

        std::filesystem::path out = cfg.get_or("output", "dir", "out");
        rc.output_dir = out.is_absolute() ? out : config_dir / out;
        rc.config_hash = cfg.hash();
        return rc;
    }

    void validate() const {
        namespace fs = std::filesystem;
        if (!fs::exists(project_root)) {
            throw ConfigError("project root does not exist: " + project_root.string());
        }
        if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
            throw ConfigError("split ratio must lie in (0,1)");
        }
        double weights =
            metrics.alpha + metrics.beta + metrics.gamma + metrics.delta;
        if (std::abs(weights - 1.0) > 1e-9) {
            throw ConfigError("metric weights must sum to 1");
        }
        if (backend.timeout_sec <= 0) {
            throw ConfigError("backend timeout must be positive");
        }
        if (backend.retries < 0) {
            throw ConfigError("backend retries must be >= 0");
        }
        if (compile_adapter_timeout_sec <= 0 || run_adapter_timeout_sec <= 0) {
            throw ConfigError("adapter timeouts must be positive");
        }
    }
};

}  // namespace testgen
