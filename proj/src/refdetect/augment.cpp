#include "blocktrace/refdetect.hpp"

#include <regex>

namespace blocktrace::refdetect {

namespace {

std::string escape_regex(const std::string& s) {
    static const std::string special = R"(\^$.|?*+()[]{})";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out += '\\';
        out += c;
    }
    return out;
}

std::string fill(std::string pattern, const std::string& placeholder, const std::string& value) {
    const std::string escaped = escape_regex(value);
    for (auto pos = pattern.find(placeholder); pos != std::string::npos;
         pos = pattern.find(placeholder, pos + escaped.size())) {
        pattern.replace(pos, placeholder.size(), escaped);
    }
    return pattern;
}

std::regex compile(const std::string& pattern, const char* name) {
    try {
        return std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw ConfigError(std::string(name) + ": invalid regular expression: " + e.what());
    }
}

bool search(const std::string& text, const std::regex& re, std::smatch* m = nullptr) {
    try {
        std::smatch local;
        return std::regex_search(text, m ? *m : local, re);
    } catch (const std::regex_error&) {
        return false;  // complexity limits on pathological inputs count as no match
    }
}

std::string package_of(const std::string& text) {
    static const std::regex re(R"(\bpackage\s+([\w.]+)\s*;)");
    std::smatch m;
    return search(text, re, &m) ? m[1].str() : std::string();
}

void parse_into(SourceModel& model, const std::string& path, const std::string& text, std::vector<std::string>& diag) {
    try {
        model.files[path] = srcmodel::parse_file(text, path);
    } catch (const srcmodel::ParseError& e) {
        diag.push_back(std::string("skipped unparseable file at ") + model.commit.substr(0, 7) + ": " + e.what());
    }
}

bool is_java(const std::string& path) { return path.size() > 5 && path.compare(path.size() - 5, 5, ".java") == 0; }

}  // namespace

std::vector<std::string> heuristic_matches(const std::vector<std::pair<std::string, std::string>>& candidates,
                                           const AugmentTarget& target, const Config& config) {
    std::optional<std::regex> deprecated_method, deprecated_type, same_type, instantiation, subtype, caller;
    if (!target.method_name.empty()) {
        deprecated_method = compile(fill(config.deprecated_method_pattern, "{method}", target.method_name),
                                    "deprecated_method_pattern");
        caller = compile(fill(config.caller_pattern, "{method}", target.method_name), "caller_pattern");
    }
    if (!target.type_name.empty()) {
        deprecated_type = compile(fill(config.deprecated_type_pattern, "{type}", target.type_name),
                                  "deprecated_type_pattern");
        same_type = compile(fill(config.same_type_pattern, "{type}", target.type_name), "same_type_pattern");
        instantiation = compile(fill(config.instantiation_pattern, "{type}", target.type_name), "instantiation_pattern");
        subtype = compile(fill(config.subtype_pattern, "{type}", target.type_name), "subtype_pattern");
    }

    std::vector<std::string> out;
    for (const auto& [path, text] : candidates) {
        bool take = false;
        if (text.find("@deprecated") != std::string::npos) {
            take = (deprecated_method && search(text, *deprecated_method)) ||
                   (deprecated_type && search(text, *deprecated_type));
        }
        if (!take && same_type && search(text, *same_type)) take = package_of(text) != target.package;
        if (!take && instantiation) take = search(text, *instantiation);
        if (!take && subtype) take = search(text, *subtype);
        if (!take && caller) take = search(text, *caller);
        if (take) out.push_back(path);
    }
    return out;
}

AugmentedModels augment_models(const gitio::Repository& repo, const gitio::CommitRef& r, const gitio::CommitRef& p,
                               const std::set<std::string>& base_right_paths, const AugmentTarget& target,
                               const Config& config) {
    AugmentedModels out;
    out.right.commit = r.id;
    out.left.commit = p.id;

    for (const auto& path : base_right_paths) {
        auto text = repo.read_file(r, path);
        if (!text) continue;
        parse_into(out.right, path, *text, out.diagnostics);
    }

    const auto changes = repo.changed_files(r);
    std::vector<std::pair<std::string, std::string>> candidates;
    for (const auto& c : changes) {
        if (!c.path_after || !is_java(*c.path_after) || base_right_paths.count(*c.path_after)) continue;
        if (auto text = repo.read_file(r, *c.path_after)) candidates.emplace_back(*c.path_after, std::move(*text));
    }
    out.heuristic_files = heuristic_matches(candidates, target, config);
    for (const auto& path : out.heuristic_files) {
        for (const auto& [cp, text] : candidates) {
            if (cp == path) parse_into(out.right, path, text, out.diagnostics);
        }
    }

    for (const auto& c : changes) {
        if (!c.path_before || !is_java(*c.path_before)) continue;
        const std::string& path = *c.path_before;
        auto before = repo.read_file(p, path);
        if (!before) continue;
        if (!out.right.files.count(path)) {
            // Files only on the p side add nothing when their content survives unchanged.
            if (auto after = repo.read_file(r, path);
                after && (*after == *before || srcmodel::normalize_without_imports(*after) ==
                                                   srcmodel::normalize_without_imports(*before))) {
                out.excluded_files.push_back(path);
                continue;
            }
        }
        parse_into(out.left, path, *before, out.diagnostics);
    }

    if (config.prune_identical_methods) {
        for (const auto& [path, lu] : out.left.files) {
            const auto* ru = out.right.file(path);
            if (!ru) continue;
            for (const auto& lt : lu->types) {
                for (const auto& rt : ru->types) {
                    if (lt.key() != rt.key()) continue;
                    for (const auto& lm : lt.methods) {
                        for (const auto& rm : rt.methods) {
                            if (lm.same_signature(rm) && lm.declaration_text == rm.declaration_text) {
                                out.pruned.insert(&lm);
                                out.pruned.insert(&rm);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace blocktrace::refdetect
