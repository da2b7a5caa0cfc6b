#include "nemo/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "nemo/errors.hpp"

namespace nemo {

namespace {

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

template <typename T>
T parse_int(const std::string& text, int line, const std::string& what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError(line, "bad " + what + " '" + text + "'");
    return value;
}

// key=value attribute list.
std::map<std::string, std::string> parse_attrs(const std::vector<std::string>& tokens,
                                               std::size_t first, int line) {
    std::map<std::string, std::string> attrs;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= tokens[i].size())
            throw ParseError(line, "expected key=value, got '" + tokens[i] + "'");
        std::string key = tokens[i].substr(0, eq);
        if (attrs.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
        attrs[key] = tokens[i].substr(eq + 1);
    }
    return attrs;
}

NodeKind parse_kind(const std::string& text, int line) {
    if (text == "cn") return NodeKind::Cn;
    if (text == "router") return NodeKind::Router;
    if (text == "ha") return NodeKind::HomeAgent;
    if (text == "ar") return NodeKind::AccessRouter;
    if (text == "mr") return NodeKind::MobileRouter;
    if (text == "mnn") return NodeKind::Mnn;
    throw ParseError(line, "unknown node kind '" + text + "'");
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view text) {
    ScenarioSpec spec;
    bool saw_mode = false, saw_seed = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string& head = tokens[0];

        if (head == "mode") {
            if (tokens.size() != 2) throw ParseError(line_no, "mode needs one argument");
            if (saw_mode) throw ParseError(line_no, "duplicate mode directive");
            if (tokens[1] == "bs")
                spec.mode = RunMode::Bs;
            else if (tokens[1] == "ro")
                spec.mode = RunMode::Ro;
            else
                throw ParseError(line_no, "mode must be bs or ro");
            saw_mode = true;
        } else if (head == "seed") {
            if (tokens.size() != 2) throw ParseError(line_no, "seed needs one argument");
            if (saw_seed) throw ParseError(line_no, "duplicate seed directive");
            spec.seed = parse_int<std::uint64_t>(tokens[1], line_no, "seed");
            saw_seed = true;
        } else if (head == "tend") {
            if (tokens.size() != 2) throw ParseError(line_no, "tend needs one argument");
            spec.t_end_ms = parse_int<std::int64_t>(tokens[1], line_no, "tend");
        } else if (head == "node") {
            if (tokens.size() < 3) throw ParseError(line_no, "node needs a name and kind=");
            NodeDecl node;
            node.name = tokens[1];
            auto attrs = parse_attrs(tokens, 2, line_no);
            for (auto& [key, value] : attrs) {
                if (key == "kind") {
                    node.kind = parse_kind(value, line_no);
                } else if (key == "addr") {
                    auto a = parse_address(value);
                    if (!a) throw ParseError(line_no, "addr must be 32 hex digits");
                    node.addr = *a;
                } else if (key == "prefix") {
                    auto p = parse_prefix(value);
                    if (!p) throw ParseError(line_no, "prefix must be <hex32>/<len>");
                    node.prefix = *p;
                } else if (key == "ha") {
                    node.ha = value;
                } else if (key == "mr") {
                    node.mr = value;
                } else if (key == "parent") {
                    node.parent = value;
                } else if (key == "policy") {
                    if (value == "allow")
                        node.policy = VisitingTrafficPolicy::Allow;
                    else if (value == "deny")
                        node.policy = VisitingTrafficPolicy::Deny;
                    else
                        throw ParseError(line_no, "policy must be allow or deny");
                } else if (key == "roauth") {
                    if (value != "deny") throw ParseError(line_no, "roauth only supports deny");
                    node.roauth_deny = true;
                } else {
                    throw ParseError(line_no, "unknown node attribute '" + key + "'");
                }
            }
            if (!attrs.count("kind")) throw ParseError(line_no, "node needs kind=");
            spec.nodes.push_back(std::move(node));
        } else if (head == "link") {
            if (tokens.size() != 4) throw ParseError(line_no, "link needs <a> <b> delay=<ms>");
            LinkDecl l;
            l.a = tokens[1];
            l.b = tokens[2];
            auto attrs = parse_attrs(tokens, 3, line_no);
            auto it = attrs.find("delay");
            if (attrs.size() != 1 || it == attrs.end())
                throw ParseError(line_no, "link needs exactly delay=<ms>");
            l.delay_ms = parse_int<int>(it->second, line_no, "delay");
            spec.links.push_back(std::move(l));
        } else if (head == "at") {
            if (tokens.size() < 3) throw ParseError(line_no, "at needs <ms> and a verb");
            std::int64_t at_ms = parse_int<std::int64_t>(tokens[1], line_no, "time");
            const std::string& verb = tokens[2];
            if (verb == "attach") {
                if (tokens.size() != 5) throw ParseError(line_no, "attach needs <mr> <target>");
                spec.schedule.push_back(AttachDirective{at_ms, tokens[3], tokens[4]});
            } else if (verb == "send") {
                if (tokens.size() < 5) throw ParseError(line_no, "send needs <src> <dst>");
                SendDirective s;
                s.at_ms = at_ms;
                s.src = tokens[3];
                s.dst = tokens[4];
                auto attrs = parse_attrs(tokens, 5, line_no);
                for (auto& [key, value] : attrs) {
                    if (key == "bytes")
                        s.bytes = parse_int<std::int64_t>(value, line_no, "bytes");
                    else if (key == "count")
                        s.count = parse_int<int>(value, line_no, "count");
                    else if (key == "interval")
                        s.interval_ms = parse_int<std::int64_t>(value, line_no, "interval");
                    else
                        throw ParseError(line_no, "unknown send attribute '" + key + "'");
                }
                if (!attrs.count("bytes")) throw ParseError(line_no, "send needs bytes=");
                spec.schedule.push_back(std::move(s));
            } else if (verb == "linkdown" || verb == "linkup") {
                if (tokens.size() != 5) throw ParseError(line_no, verb + " needs <a> <b>");
                spec.schedule.push_back(
                    LinkStateDirective{at_ms, tokens[3], tokens[4], verb == "linkup"});
            } else {
                throw ParseError(line_no, "unknown schedule verb '" + verb + "'");
            }
        } else {
            throw ParseError(line_no, "unknown directive '" + head + "'");
        }
    }

    if (!saw_mode || !saw_seed) throw ParseError(line_no, "mode and seed are mandatory");
    validate_scenario(spec);
    return spec;
}

void validate_scenario(const ScenarioSpec& spec) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };

    std::map<std::string, const NodeDecl*> by_name;
    std::set<Address> addrs;
    for (const auto& n : spec.nodes) {
        if (!by_name.emplace(n.name, &n).second) fail("duplicate node name '" + n.name + "'");
        if (n.addr && !addrs.insert(*n.addr).second)
            fail("duplicate address on node '" + n.name + "'");
    }
    auto lookup = [&](const std::string& name, const std::string& why) -> const NodeDecl& {
        auto it = by_name.find(name);
        if (it == by_name.end()) fail(why + " references unknown node '" + name + "'");
        return *it->second;
    };

    bool nested = false;
    for (const auto& n : spec.nodes) {
        switch (n.kind) {
            case NodeKind::MobileRouter: {
                if (!n.addr) fail("mr '" + n.name + "' needs addr=");
                if (!n.prefix) fail("mr '" + n.name + "' needs prefix= (its MNP)");
                if (!n.ha) fail("mr '" + n.name + "' needs ha=");
                if (lookup(*n.ha, "mr '" + n.name + "'").kind != NodeKind::HomeAgent)
                    fail("mr '" + n.name + "': ha= must name a ha node");
                if (n.parent) {
                    nested = true;
                    if (lookup(*n.parent, "mr '" + n.name + "'").kind != NodeKind::MobileRouter)
                        fail("mr '" + n.name + "': parent= must name an mr node");
                }
                break;
            }
            case NodeKind::Mnn: {
                if (!n.addr) fail("mnn '" + n.name + "' needs addr=");
                if (!n.mr) fail("mnn '" + n.name + "' needs mr=");
                if (lookup(*n.mr, "mnn '" + n.name + "'").kind != NodeKind::MobileRouter)
                    fail("mnn '" + n.name + "': mr= must name an mr node");
                break;
            }
            case NodeKind::AccessRouter:
                if (!n.prefix) fail("ar '" + n.name + "' needs prefix=");
                break;
            case NodeKind::HomeAgent:
            case NodeKind::Cn:
                if (!n.addr) fail(n.name + " needs addr=");
                break;
            case NodeKind::Router:
                break;
        }
        if (n.policy && n.kind != NodeKind::HomeAgent)
            fail("policy= only applies to ha nodes ('" + n.name + "')");
        if (n.roauth_deny && n.kind != NodeKind::Cn)
            fail("roauth= only applies to cn nodes ('" + n.name + "')");
        if (n.parent && n.kind != NodeKind::MobileRouter)
            fail("parent= only applies to mr nodes ('" + n.name + "')");
    }

    if (nested && spec.mode == RunMode::Ro)
        fail("route optimization with nested mobile routers is not supported; use mode bs");

    std::set<std::pair<std::string, std::string>> link_set;
    for (const auto& l : spec.links) {
        lookup(l.a, "link");
        lookup(l.b, "link");
        if (l.a == l.b) fail("self-link on '" + l.a + "'");
        if (l.delay_ms < 1) fail("link " + l.a + "-" + l.b + ": delay must be >= 1");
        auto key = std::minmax(l.a, l.b);
        if (!link_set.insert({key.first, key.second}).second)
            fail("duplicate link " + l.a + "-" + l.b);
    }
    auto has_link = [&](const std::string& a, const std::string& b) {
        auto key = std::minmax(a, b);
        return link_set.count({key.first, key.second}) > 0;
    };

    for (const auto& n : spec.nodes)
        if (n.kind == NodeKind::Mnn && !has_link(n.name, *n.mr))
            fail("mnn '" + n.name + "' has no link to its mr '" + *n.mr + "'");

    for (const auto& d : spec.schedule) {
        if (const auto* a = std::get_if<AttachDirective>(&d)) {
            const NodeDecl& mr = lookup(a->mr, "attach");
            if (mr.kind != NodeKind::MobileRouter) fail("attach: '" + a->mr + "' is not an mr");
            const NodeDecl& target = lookup(a->target, "attach");
            switch (target.kind) {
                case NodeKind::AccessRouter:
                    break;
                case NodeKind::MobileRouter:
                    if (!mr.parent || *mr.parent != target.name)
                        fail("attach: '" + a->mr + "' may only nest under its declared parent");
                    break;
                case NodeKind::HomeAgent:
                    if (!mr.ha || *mr.ha != target.name)
                        fail("attach: '" + a->mr + "' may only return home to its own ha");
                    break;
                default:
                    fail("attach target '" + a->target + "' must be an ar, parent mr or home ha");
            }
            if (!has_link(a->mr, a->target))
                fail("attach: no link declared between '" + a->mr + "' and '" + a->target + "'");
        } else if (const auto* s = std::get_if<SendDirective>(&d)) {
            if (!lookup(s->src, "send").addr) fail("send: '" + s->src + "' has no address");
            if (!lookup(s->dst, "send").addr) fail("send: '" + s->dst + "' has no address");
            if (s->bytes < 0) fail("send: bytes must be >= 0");
            if (s->count < 1) fail("send: count must be >= 1");
            if (s->interval_ms < 0) fail("send: interval must be >= 0");
        } else if (const auto* ls = std::get_if<LinkStateDirective>(&d)) {
            if (!has_link(ls->a, ls->b)) fail("linkdown/up: no such link " + ls->a + "-" + ls->b);
        }
    }
}

std::string serialize_scenario(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "mode " << (spec.mode == RunMode::Bs ? "bs" : "ro") << '\n';
    out << "seed " << spec.seed << '\n';
    out << "tend " << spec.t_end_ms << '\n';
    for (const auto& n : spec.nodes) {
        out << "node " << n.name << " kind=" << to_string(n.kind);
        if (n.addr) out << " addr=" << format_address(*n.addr);
        if (n.prefix) out << " prefix=" << format_prefix(*n.prefix);
        if (n.ha) out << " ha=" << *n.ha;
        if (n.mr) out << " mr=" << *n.mr;
        if (n.parent) out << " parent=" << *n.parent;
        if (n.policy)
            out << " policy=" << (*n.policy == VisitingTrafficPolicy::Deny ? "deny" : "allow");
        if (n.roauth_deny) out << " roauth=deny";
        out << '\n';
    }
    for (const auto& l : spec.links)
        out << "link " << l.a << ' ' << l.b << " delay=" << l.delay_ms << '\n';
    for (const auto& d : spec.schedule) {
        if (const auto* a = std::get_if<AttachDirective>(&d)) {
            out << "at " << a->at_ms << " attach " << a->mr << ' ' << a->target << '\n';
        } else if (const auto* s = std::get_if<SendDirective>(&d)) {
            out << "at " << s->at_ms << " send " << s->src << ' ' << s->dst
                << " bytes=" << s->bytes << " count=" << s->count
                << " interval=" << s->interval_ms << '\n';
        } else if (const auto* ls = std::get_if<LinkStateDirective>(&d)) {
            out << "at " << ls->at_ms << (ls->up ? " linkup " : " linkdown ") << ls->a << ' '
                << ls->b << '\n';
        }
    }
    return out.str();
}

}  // namespace nemo
