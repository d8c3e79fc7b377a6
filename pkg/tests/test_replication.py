import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from racksim.placement import Block
from racksim.replication import (
    CostModel,
    Reason,
    ReplicationConfig,
    SelfTransfer,
    decide_rf,
    transfer_time,
    update_cost,
)
from racksim.sim import SimConfig, build_cluster, ingest_file
from racksim.topology import LocalityLevel

CFG = ReplicationConfig(max_rf=8)


def test_decide_rf_scale_down_to_floor():
    decision = decide_rf(0.0, 3, CFG)
    assert decision.rf_new == 1
    assert decision.reason is Reason.SCALE_DOWN


def test_decide_rf_hold_at_target():
    decision = decide_rf(6.0, 3, CFG)
    assert decision.rf_new == 3
    assert decision.reason is Reason.HOLD


def test_decide_rf_hysteresis_band():
    decision = decide_rf(6.0, 4, CFG)
    assert decision.rf_new == 4
    assert decision.reason is Reason.HOLD


def test_decide_rf_scale_up():
    decision = decide_rf(10.0, 3, CFG)
    assert decision.rf_new == 5
    assert decision.reason is Reason.SCALE_UP


def test_decide_rf_validates():
    with pytest.raises(ValueError):
        decide_rf(-1.0, 3, CFG)
    with pytest.raises(ValueError):
        decide_rf(0.0, 9, CFG)
    with pytest.raises(ValueError):
        ReplicationConfig(max_rf=2, min_rf=3)
    with pytest.raises(ValueError):
        ReplicationConfig(max_rf=2, accesses_per_replica=0)


@given(st.floats(0, 1e6, allow_nan=False), st.floats(0, 1e6, allow_nan=False), st.integers(1, 8))
def test_decide_rf_monotone(a, b, rf):
    lo, hi = sorted((a, b))
    assert decide_rf(lo, rf, CFG).rf_new <= decide_rf(hi, rf, CFG).rf_new


@given(st.floats(0, 1e6, allow_nan=False), st.integers(1, 8), st.integers(0, 3))
def test_decide_rf_bounds_and_idempotence(count, rf, hysteresis):
    cfg = ReplicationConfig(max_rf=8, hysteresis=hysteresis)
    decision = decide_rf(count, rf, cfg)
    assert cfg.min_rf <= decision.rf_new <= cfg.max_rf
    assert (decision.reason is Reason.HOLD) == (decision.rf_new == decision.rf_old)
    if hysteresis == 0:
        again = decide_rf(count, decision.rf_new, cfg)
        assert again.reason is Reason.HOLD
        assert again.rf_new == decision.rf_new


def test_cost_model_validates():
    with pytest.raises(ValueError):
        CostModel(bw_in_rack=1.0, bw_cross_rack=2.0)
    with pytest.raises(ValueError):
        CostModel(bw_cross_rack=0.0)


def test_update_cost_in_rack(topo8):
    block = Block(0, 0, 67108864, 0)
    cost = update_cost([block], [("Machine1.pc", "Machine2.pc")], topo8, CostModel())
    assert cost == pytest.approx(67108864 / 100e6 + 0.001)
    assert cost == pytest.approx(0.67208864)


def test_update_cost_cross_rack_pair(topo8):
    block = Block(0, 0, 67108864, 0)
    plan = [("Machine2.pc", "Machine3.pc"), ("Machine2.pc", "Machine7.pc")]
    cost = update_cost([block, block], plan, topo8, CostModel())
    assert cost == pytest.approx(2 * (67108864 / 12.5e6 + 0.005))
    assert cost == pytest.approx(10.74741824)


def test_update_cost_empty_plan(topo8):
    assert update_cost([], [], topo8, CostModel()) == 0.0


def test_update_cost_self_transfer(topo8):
    block = Block(0, 0, 1, 0)
    with pytest.raises(SelfTransfer):
        update_cost([block], [("Machine2.pc", "Machine2.pc")], topo8, CostModel())
    with pytest.raises(ValueError):
        update_cost([block, block], [("Machine2.pc", "Machine3.pc")], topo8, CostModel())


def test_update_cost_additive(topo8):
    blocks = [Block(i, 0, (i + 1) << 20, i) for i in range(4)]
    plan = [
        ("Machine2.pc", "Machine3.pc"),
        ("Machine3.pc", "Machine4.pc"),
        ("Machine5.pc", "Machine8.pc"),
        ("Machine7.pc", "Machine8.pc"),
    ]
    model = CostModel()
    total = update_cost(blocks, plan, topo8, model)
    split = update_cost(blocks[:2], plan[:2], topo8, model) + update_cost(
        blocks[2:], plan[2:], topo8, model
    )
    assert total == pytest.approx(split, rel=1e-12)
    assert total > 0.0


def test_transfer_time_levels():
    model = CostModel()
    assert transfer_time(model, 1 << 20, LocalityLevel.NODE_LOCAL) == 0.0
    assert transfer_time(model, 0, LocalityLevel.RACK_LOCAL) == model.per_transfer_latency_in_rack
    assert transfer_time(model, 1 << 20, LocalityLevel.OFF_RACK) > transfer_time(
        model, 1 << 20, LocalityLevel.RACK_LOCAL
    )


# --- apply_decision through a real cluster ---------------------------------

def _cluster_with_file(topo8, rf, n_blocks=1):
    cfg = SimConfig(seed=7)
    cluster = build_cluster(topo8, cfg)
    rng = random.Random(99)
    blocks, _ = ingest_file(cluster, n_blocks * cfg.block_size_bytes, "Machine2.pc", rf, rng)
    return cluster, blocks[0].file_id, rng


def test_apply_hold_is_noop(topo8):
    from racksim.replication import apply_decision

    cluster, fid, rng = _cluster_with_file(topo8, 3)
    before = {bid: list(hosts) for bid, hosts in cluster.replicas.items()}
    decision = decide_rf(6.0, 3, CFG, file_id=fid)
    assert decision.reason is Reason.HOLD
    _, cost = apply_decision(cluster, decision, rng)
    assert cost == 0.0
    assert {bid: list(h) for bid, h in cluster.replicas.items()} == before


def test_apply_scale_up_prices_one_transfer(topo8):
    from racksim.replication import Reason, ReplicationDecision, apply_decision

    cluster, fid, rng = _cluster_with_file(topo8, 3)
    decision = ReplicationDecision(fid, 3, 4, 8.0, Reason.SCALE_UP)
    block_id = cluster.files[fid][0]
    holders_before = list(cluster.replicas[block_id])
    _, cost = apply_decision(cluster, decision, rng)
    holders_after = cluster.replicas[block_id]
    assert len(holders_after) == 4
    new_host = holders_after[-1]
    block = cluster.blocks[block_id]
    sources = [h for h in holders_before]
    from racksim.topology import locality

    best = min(locality(topo8, h, new_host) for h in sources)
    assert cost == pytest.approx(transfer_time(CostModel(), block.size_bytes, best))


def test_apply_scale_down_keeps_writer(topo8):
    from racksim.replication import Reason, ReplicationDecision, apply_decision

    cluster, fid, rng = _cluster_with_file(topo8, 3, n_blocks=2)
    decision = ReplicationDecision(fid, 3, 1, 0.0, Reason.SCALE_DOWN)
    _, cost = apply_decision(cluster, decision, rng)
    assert cost == 0.0
    for bid in cluster.files[fid]:
        assert cluster.replicas[bid] == ["Machine2.pc"]


@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 1000))
def test_apply_decision_conserves_counts(rf_old, rf_new, seed):
    from conftest import TOPOLOGY_8_NODES
    from racksim.replication import Reason, ReplicationDecision, apply_decision
    from racksim.topology import parse_topology

    topo = parse_topology(TOPOLOGY_8_NODES)
    cfg = SimConfig(seed=seed)
    cluster = build_cluster(topo, cfg)
    rng = random.Random(seed)
    blocks, _ = ingest_file(cluster, 3 * cfg.block_size_bytes, "Machine4.pc", rf_old, rng)
    fid = blocks[0].file_id
    if rf_new > rf_old:
        reason = Reason.SCALE_UP
    elif rf_new < rf_old:
        reason = Reason.SCALE_DOWN
    else:
        reason = Reason.HOLD
    apply_decision(cluster, ReplicationDecision(fid, rf_old, rf_new, 0.0, reason), rng)
    total = sum(len(cluster.replicas[bid]) for bid in cluster.files[fid])
    assert total == rf_new * len(blocks)
