#include "nemo/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace nemo {

namespace {

// Integral doubles render as integers ("6" not "6.0"); everything else as-is.
nlohmann::ordered_json number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15)
        return static_cast<std::int64_t>(v);
    return v;
}

std::string format_double(double v) {
    std::ostringstream out;
    out << number(v).dump();
    return out.str();
}

}  // namespace

std::string emit_report(const MetricsReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            nlohmann::ordered_json j;
            j["flows"] = nlohmann::ordered_json::array();
            for (const auto& f : report.flows) {
                nlohmann::ordered_json jf;
                jf["flow_id"] = f.flow_id;
                jf["traversals"] = number(f.traversals);
                jf["shortest_possible"] = f.shortest_possible;
                jf["stretch"] = number(f.stretch);
                jf["bytes_on_wire"] = f.bytes_on_wire;
                jf["overhead_bytes"] = f.overhead_bytes;
                jf["delivered"] = f.delivered;
                jf["dropped"] = f.dropped;
                j["flows"].push_back(std::move(jf));
            }
            j["ha_traversal_share"] = number(report.ha_traversal_share);
            j["signaling_msgs_per_handoff"] = number(report.signaling_msgs_per_handoff);
            j["drops_by_reason"] = nlohmann::ordered_json::object();
            for (const auto& [reason, count] : report.drops_by_reason)
                j["drops_by_reason"][reason] = count;
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::ostringstream out;
            out << "flow_id,traversals,shortest_possible,stretch,bytes_on_wire,"
                   "overhead_bytes,delivered,dropped\n";
            for (const auto& f : report.flows) {
                out << f.flow_id << ',' << format_double(f.traversals) << ','
                    << f.shortest_possible << ',' << format_double(f.stretch) << ','
                    << f.bytes_on_wire << ',' << f.overhead_bytes << ',' << f.delivered << ','
                    << f.dropped << '\n';
            }
            return out.str();
        }
        case ReportFormat::Table: {
            std::ostringstream out;
            out << std::left << std::setw(8) << "flow" << std::right << std::setw(11)
                << "traversals" << std::setw(10) << "shortest" << std::setw(9) << "stretch"
                << std::setw(15) << "bytes_on_wire" << std::setw(15) << "overhead_bytes"
                << std::setw(11) << "delivered" << std::setw(9) << "dropped" << '\n';
            for (const auto& f : report.flows) {
                out << std::left << std::setw(8) << f.flow_id << std::right << std::setw(11)
                    << format_double(f.traversals) << std::setw(10) << f.shortest_possible
                    << std::setw(9) << format_double(f.stretch) << std::setw(15)
                    << f.bytes_on_wire << std::setw(15) << f.overhead_bytes << std::setw(11)
                    << f.delivered << std::setw(9) << f.dropped << '\n';
            }
            out << '\n';
            out << "ha_traversal_share          " << format_double(report.ha_traversal_share)
                << '\n';
            out << "signaling_msgs_per_handoff  "
                << format_double(report.signaling_msgs_per_handoff) << '\n';
            out << "drops_by_reason             ";
            if (report.drops_by_reason.empty()) {
                out << "none";
            } else {
                bool first = true;
                for (const auto& [reason, count] : report.drops_by_reason) {
                    if (!first) out << ", ";
                    out << reason << "=" << count;
                    first = false;
                }
            }
            out << '\n';
            return out.str();
        }
    }
    return {};
}

}  // namespace nemo
