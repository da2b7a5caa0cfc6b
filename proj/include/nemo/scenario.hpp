// Scenario files: a line-oriented grammar, one directive per line.
//
//   mode bs|ro
//   seed <u64>
//   tend <ms>
//   node <name> kind=cn|router|ha|ar|mr|mnn [addr=<hex32>] [prefix=<hex32>/<len>]
//        [ha=<name>] [mr=<name>] [parent=<mr-name>] [policy=allow|deny] [roauth=deny]
//   link <a> <b> delay=<ms>
//   at <ms> attach <mr> <target>        target: AR, declared parent MR, or own HA
//   at <ms> send <src> <dst> bytes=<n> [count=<k>] [interval=<ms>]
//   at <ms> linkdown <a> <b>
//   at <ms> linkup <a> <b>
//
// '#' starts a comment. mode and seed are mandatory. Unknown directives and
// unknown keys are rejected with the offending line number.
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nemo/nemo_bs.hpp"
#include "nemo/simnet.hpp"

namespace nemo {

enum class RunMode { Bs, Ro };

struct NodeDecl {
    std::string name;
    NodeKind kind = NodeKind::Router;
    std::optional<Address> addr;
    std::optional<Prefix> prefix;
    std::optional<std::string> ha;
    std::optional<std::string> mr;
    std::optional<std::string> parent;
    std::optional<VisitingTrafficPolicy> policy;  // ha nodes
    bool roauth_deny = false;                     // cn nodes

    friend bool operator==(const NodeDecl&, const NodeDecl&) = default;
};

struct LinkDecl {
    std::string a;
    std::string b;
    int delay_ms = 1;

    friend bool operator==(const LinkDecl&, const LinkDecl&) = default;
};

struct AttachDirective {
    std::int64_t at_ms = 0;
    std::string mr;
    std::string target;

    friend bool operator==(const AttachDirective&, const AttachDirective&) = default;
};

struct SendDirective {
    std::int64_t at_ms = 0;
    std::string src;
    std::string dst;
    std::int64_t bytes = 0;
    int count = 1;
    std::int64_t interval_ms = 0;

    friend bool operator==(const SendDirective&, const SendDirective&) = default;
};

struct LinkStateDirective {
    std::int64_t at_ms = 0;
    std::string a;
    std::string b;
    bool up = false;

    friend bool operator==(const LinkStateDirective&, const LinkStateDirective&) = default;
};

using Directive = std::variant<AttachDirective, SendDirective, LinkStateDirective>;

struct ScenarioSpec {
    RunMode mode = RunMode::Bs;
    std::uint64_t seed = 0;
    std::int64_t t_end_ms = 10'000;
    std::vector<NodeDecl> nodes;
    std::vector<LinkDecl> links;
    std::vector<Directive> schedule;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Parses and validates. Throws ParseError (with line number) on grammar
/// violations, ValidationError on dangling references and inconsistencies.
ScenarioSpec parse_scenario(std::string_view text);

/// Structural checks only (parse_scenario already calls this).
void validate_scenario(const ScenarioSpec& spec);

/// Canonical text form; parse(serialize(s)) == s for every valid spec.
std::string serialize_scenario(const ScenarioSpec& spec);

}  // namespace nemo
