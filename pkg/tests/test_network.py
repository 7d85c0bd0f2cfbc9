import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotdefense.network import (
    DeploymentVector,
    NetworkSpec,
    SpecError,
    apply_deployment,
    build_network,
    check_deployment,
    decode,
    decoy_types,
    encode,
    genome_width,
    patch_types,
    random_deployment,
    repair,
    valid_space,
    valid_space_size,
)
from iotdefense.scenarios import PACS_DEPLOYMENTS, SCALED_IOT_GRID, pacs_case_study, scaled_network


def pacs_dict():
    return pacs_case_study().to_dict()


def test_pacs_catalog(pacs):
    Y_d, Y_p = decoy_types(pacs), patch_types(pacs)
    assert [t.count for t in Y_d] == [2, 5, 5, 1, 1, 1, 1]
    assert [t.name for t in Y_p] == ["Ultrasound (Win7)", "MRI (Win7)", "XRay (Win7)", "CT (Win7)"]
    assert genome_width(Y_d, Y_p) == 12
    assert len(pacs.real_nodes) == 16
    assert len(pacs.vulnerabilities) == 16
    assert pacs.price_model.total_cost == 36_900


def test_spec_round_trip():
    spec = pacs_case_study()
    again = NetworkSpec.loads(spec.dumps())
    assert again == spec
    assert json.loads(spec.dumps())["intelligence_cost"] == 20_000


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["device_types"].append(dict(d["device_types"][0])), "duplicate device type"),
        (lambda d: d["device_types"][1].update(count=0), "count"),
        (lambda d: d["device_types"][0].pop("decoy_price_full_os"), "full-OS"),
        (lambda d: d["device_types"][4].pop("patch_price"), "patch price"),
        (lambda d: [s.update(entry=False) for s in d["subnets"]], "entry"),
        (lambda d: d["subnet_edges"].append(["VLAN1", "VLAN9"]), "undeclared"),
        (lambda d: d.update(probabilities={"emulated": 0.0, "full_os": 0.9}), "probability"),
    ],
)
def test_spec_errors(mutate, message):
    d = pacs_dict()
    mutate(d)
    with pytest.raises(SpecError, match=message):
        build_network(d)


def test_spec_missing_server_type():
    d = pacs_dict()
    d["device_types"] = d["device_types"][1:]
    with pytest.raises(SpecError, match="target category"):
        build_network(d)


def test_apply_deployment_p1(pacs):
    deployed = apply_deployment(pacs, PACS_DEPLOYMENTS["P1"])
    assert len(deployed.decoy_nodes) == 5
    patched = [n for n in deployed.nodes if n.patched]
    assert sorted(n.type.name for n in patched) == ["Ultrasound (Win7)", "XRay (Win7)"]
    server_decoy = deployed.node("decoy-pacs_server_linux")
    assert server_decoy.interaction_prob == 0.5 and server_decoy.cost == 400
    # the input network is untouched
    assert not any(n.patched or n.decoy for n in pacs.nodes)


def test_apply_deployment_rejects_missing_server_decoy(pacs):
    dv = (0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0)
    with pytest.raises(SpecError, match="server decoy"):
        apply_deployment(pacs, dv)
    assert len(apply_deployment(pacs, dv, check=False).decoy_nodes) == 2


def test_encode_examples(pacs):
    Y_d, Y_p = decoy_types(pacs), patch_types(pacs)
    dv = DeploymentVector.from_values(PACS_DEPLOYMENTS["dv1"], len(Y_d))
    assert encode(dv, Y_d, Y_p) == "101010001011"
    assert decode("111010001011", Y_d, Y_p).decoy_part[0] == 2  # 11 clamps to full OS
    bad = decode("000000000000", Y_d, Y_p)
    assert not bad.valid


@pytest.mark.parametrize("n_iot, width", list(zip(SCALED_IOT_GRID, range(8, 21, 2))))
def test_scaled_widths(n_iot, width):
    net = build_network(scaled_network(n_iot))
    Y_d, Y_p = decoy_types(net), patch_types(net)
    assert genome_width(Y_d, Y_p) == width
    assert valid_space_size(Y_d, Y_p) == 2 * 2 ** (width - 2)


def test_valid_space(pacs):
    Y_d, Y_p = decoy_types(pacs), patch_types(pacs)
    space = valid_space(Y_d, Y_p)
    assert space.shape == (2048, 11)
    assert len({tuple(r) for r in space}) == 2048
    assert (space[:, 0] > 0).all()


@settings(max_examples=200)
@given(st.lists(st.integers(0, 1), min_size=12, max_size=12), st.integers(0, 2**32 - 1))
def test_decode_repair_encode(bits, seed):
    net = build_network(pacs_case_study())
    Y_d, Y_p = decoy_types(net), patch_types(net)
    rng = np.random.default_rng(seed)
    dv = repair(decode(bits, Y_d, Y_p), Y_d, rng)
    check_deployment(dv, Y_d, Y_p)
    # repair is idempotent and the repaired vector round-trips through the encoding
    assert repair(dv, Y_d, rng) == dv
    assert decode(encode(dv, Y_d, Y_p), Y_d, Y_p) == dv


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_random_deployment_is_valid(seed):
    net = build_network(scaled_network(100))
    Y_d, Y_p = decoy_types(net), patch_types(net)
    dv = random_deployment(Y_d, Y_p, np.random.default_rng(seed))
    check_deployment(dv, Y_d, Y_p)
