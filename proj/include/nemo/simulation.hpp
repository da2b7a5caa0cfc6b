// Binds a parsed scenario to the engine: owns the topology, the per-node
// protocol state, datagram forwarding, tracing and metrics collection.
//
// One simulation, one thread, one engine. Node state machines stay pure;
// this class is the only place that schedules events and writes the trace.
#pragma once

#include <map>
#include <string>

#include "nemo/metrics.hpp"
#include "nemo/nemo_bs.hpp"
#include "nemo/route_opt.hpp"
#include "nemo/scenario.hpp"
#include "nemo/simnet.hpp"

namespace nemo {

struct RunConfig {
    std::int64_t event_cap = kDefaultEventCap;
    int max_encap_depth = kDefaultMaxEncapDepth;
    std::int64_t bu_retransmit_ms = kBuRetransmitMs;
};

class Simulation {
  public:
    explicit Simulation(ScenarioSpec spec, RunConfig cfg = {});

    /// Runs the whole schedule up to the scenario's tend.
    void run();
    /// Incremental variant for tests that want to inspect mid-run state.
    void run_until(std::int64_t t_ms);

    const std::vector<TraceRecord>& trace() const { return store_.records(); }
    std::string trace_text() const;
    MetricsReport report() const { return store_.report(); }
    const MetricsStore& store() const { return store_; }
    const Topology& topology() const { return topo_; }
    std::int64_t now() const { return engine_.now(); }

    struct MrRuntime {
        NodeId node;
        MrState st;
        CnRegistry reg;
    };

    NodeId node_id(const std::string& name) const;
    const MrRuntime& mr(const std::string& name) const;
    const HaState& ha(const std::string& name) const;
    const CnState& cn(const std::string& name) const;

  private:
    struct HaRuntime {
        NodeId node;
        HaState st;
    };
    struct CnRuntime {
        NodeId node;
        CnState st;
    };
    struct FlowInfo {
        NodeId src;
        NodeId dst;
    };

    bool ro_enabled() const { return spec_.mode == RunMode::Ro; }

    Datagram stamp(Datagram d);
    void send_from(NodeId at, Datagram d);
    void send_to_neighbor(NodeId at, NodeId to, const Datagram& d);
    void trace_drop(NodeId at, const Datagram& d, DropReason reason);
    void trace_consume(NodeId at, const Datagram& d);

    void receive(NodeId at, NodeId from, Datagram d);
    void transit(NodeId at, Datagram d);
    void handle_at_ha(NodeId at, Datagram d);
    void ha_consume(NodeId at, HaRuntime& ha, const Datagram& d);
    void on_mr(NodeId at, NodeId from, Datagram d);
    void on_mr_ingress(NodeId at, MrRuntime& mr, Datagram d);
    void mr_forward_inbound(NodeId at, MrRuntime& mr, Datagram inner);
    void mr_consume_control(NodeId at, MrRuntime& mr, const Datagram& d);
    void on_cn(NodeId at, Datagram d);
    void on_mnn(NodeId at, Datagram d);
    void consume_data(NodeId at, const Datagram& d);

    void do_attach(NodeId mr_node, NodeId target);
    void do_inject(int flow_id, NodeId src, NodeId dst, std::int64_t bytes, std::int64_t seq);
    void schedule_home_bu_timeout(NodeId mr_node, std::int64_t seq);
    void schedule_cn_bu_timeout(NodeId mr_node, const Address& cn, std::int64_t seq);
    bool is_mobile_network_member(NodeId mr_node, NodeId from) const;

    ScenarioSpec spec_;
    RunConfig cfg_;
    Topology topo_;
    Engine engine_;
    MetricsStore store_;
    std::map<NodeId, MrRuntime> mrs_;
    std::map<NodeId, HaRuntime> has_;
    std::map<NodeId, CnRuntime> cns_;
    std::map<int, FlowInfo> flows_;
    std::vector<std::string> names_;  // by node id
    std::uint64_t next_pkt_id_ = 0;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    std::string trace_text;
    MetricsReport report;
};

/// Builds the simulation, runs it to tend, returns trace plus summary.
RunResult run_scenario(const ScenarioSpec& spec, RunConfig cfg = {});

}  // namespace nemo
