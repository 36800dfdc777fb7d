import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfkg.consolidate import EvidenceRecord, SourceRef
from dfkg.graph import (
    EDGE_TAXONOMY,
    PAIR_LABELS,
    build_graph,
    derive_edges,
    generate_hypothesis,
    group_isolated,
    node_value,
    normalize_value,
    pair_label,
    parse_graph_json,
    taxonomy_pair,
    to_dot,
)
from dfkg.refine import EntityType, RefinedArtifact

T = EntityType


def _evidence(uid, artifacts, path="/data/com.example.app/databases/", lid=1):
    return EvidenceRecord(
        uid=uid,
        artifacts=artifacts,
        source=SourceRef("a.db", "t", path, lid),
    )


def _a(uid, etype, value, conf=9):
    return RefinedArtifact(uid, etype, value, conf, "mock")


def test_taxonomy_is_the_eleven_pairs():
    assert len(EDGE_TAXONOMY) == 11
    assert PAIR_LABELS[0] == "Timestamp-App Name"
    assert PAIR_LABELS[-1] == "Phone Number-Email"
    assert len(set(PAIR_LABELS)) == 11
    for label in PAIR_LABELS:
        assert " - " not in label  # single ASCII hyphen joins the two labels


def test_taxonomy_pair_is_order_insensitive():
    assert taxonomy_pair(T.SEARCH_KEYWORD, T.APP_NAME) == (T.APP_NAME, T.SEARCH_KEYWORD)
    assert taxonomy_pair(T.APP_NAME, T.SEARCH_KEYWORD) == (T.APP_NAME, T.SEARCH_KEYWORD)
    assert taxonomy_pair(T.EMAIL, T.MESSAGE) is None
    assert taxonomy_pair(T.EMAIL, T.EMAIL) is None


def test_normalize_value_rules():
    assert normalize_value(T.EMAIL, " CryptoWendyO@ProtonMail.com ") == "cryptowendyo@protonmail.com"
    assert normalize_value(T.MAC_ADDRESS, "34:c7:31:f8:61:3b") == "34:C7:31:F8:61:3B"
    assert normalize_value(T.PHONE_NUMBER, "+1 (650) 680-8040") == "+16506808040"
    assert normalize_value(T.PHONE_NUMBER, "16506808040") == "+16506808040"
    assert normalize_value(T.PHONE_NUMBER, "911") == "911"  # too short to be E.164
    assert normalize_value(T.HUMAN_NAME, "  Marsha Mellos ") == "Marsha Mellos"
    assert normalize_value(T.TIMESTAMP, "03 April 2021 15:24:18") == "03 April 2021 15:24:18"


def test_nodes_merge_on_normalized_value():
    records = [
        _evidence("aaaaaaaa_t_1", [_a("aaaaaaaa_t_1", T.EMAIL, "X@Y.com", 6)]),
        _evidence("aaaaaaaa_t_2", [_a("aaaaaaaa_t_2", T.EMAIL, "x@y.com", 9)]),
    ]
    graph = build_graph(records)
    assert len(graph.nodes) == 1
    node = graph.nodes[0]
    assert node.node_id == "Email|x@y.com"
    assert node.max_confidence == 9
    assert node.provenance == ["aaaaaaaa_t_1", "aaaaaaaa_t_2"]


def test_min_confidence_excludes_nodes_and_edges():
    rec = _evidence(
        "aaaaaaaa_t_1",
        [
            _a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18", 8),
            _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome", 4),
        ],
    )
    graph = build_graph([rec], min_confidence=5)
    assert [n.entity_type for n in graph.nodes] == [T.TIMESTAMP]
    assert graph.edges == []


def test_within_record_cooccurrence_yields_taxonomy_edges_only():
    rec = _evidence(
        "aaaaaaaa_t_1",
        [
            _a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18"),
            _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome"),
            _a("aaaaaaaa_t_1", T.EMAIL, "x@y.com"),
            _a("aaaaaaaa_t_1", T.MESSAGE, "hello there"),
        ],
    )
    graph = build_graph([rec])
    labels = sorted(e.type_pair for e in graph.edges)
    # Message pairs with nothing; the other three types pair among themselves
    assert labels == sorted(["Timestamp-App Name", "Email-App Name", "Timestamp-Email"])


def test_cross_record_values_never_connect():
    records = [
        _evidence("aaaaaaaa_t_1", [_a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18")]),
        _evidence("aaaaaaaa_t_2", [_a("aaaaaaaa_t_2", T.APP_NAME, "Chrome")]),
    ]
    assert build_graph(records).edges == []


def test_edge_identity_and_provenance_merge():
    shared = [
        _a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18"),
        _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome"),
    ]
    again = [
        _a("aaaaaaaa_t_2", T.TIMESTAMP, "03 April 2021 15:24:18"),
        _a("aaaaaaaa_t_2", T.APP_NAME, "Chrome"),
    ]
    graph = build_graph([_evidence("aaaaaaaa_t_1", shared), _evidence("aaaaaaaa_t_2", again)])
    assert len(graph.edges) == 1
    edge = graph.edges[0]
    assert len(edge.edge_id) == 16
    assert int(edge.edge_id, 16) >= 0
    assert edge.provenance == ["aaaaaaaa_t_1", "aaaaaaaa_t_2"]
    assert graph.instances() == [(edge.edge_id, "aaaaaaaa_t_1"), (edge.edge_id, "aaaaaaaa_t_2")]


HYPOTHESIS_ORACLE = [
    ((T.TIMESTAMP, T.APP_NAME), {T.TIMESTAMP: "25 June 2021 02:29:19", T.APP_NAME: "Twitter"},
     "User interacted with Twitter on 25 June 2021 02:29:19."),
    ((T.EMAIL, T.APP_NAME), {T.EMAIL: "cryptowendyo@protonmail.com", T.APP_NAME: "Twitter"},
     "User account associated with the email cryptowendyo@protonmail.com was linked to Twitter."),
    ((T.APP_NAME, T.SEARCH_KEYWORD), {T.APP_NAME: "Chrome", T.SEARCH_KEYWORD: "italianos near me"},
     'User performed a Google search for "italianos near me" in Chrome.'),
    ((T.MAC_ADDRESS, T.APP_NAME), {T.MAC_ADDRESS: "34:C7:31:F8:61:3B", T.APP_NAME: "Bluetooth"},
     "Device with MAC address 34:C7:31:F8:61:3B was connected via Bluetooth."),
    ((T.TIMESTAMP, T.EMAIL), {T.TIMESTAMP: "03 April 2021 15:24:18", T.EMAIL: "x@y.com"},
     "User interacted with content associated with the email x@y.com on 03 April 2021 15:24:18."),
    ((T.TIMESTAMP, T.SEARCH_KEYWORD), {T.TIMESTAMP: "03 April 2021 15:24:18", T.SEARCH_KEYWORD: "weather boston"},
     'User searched for "weather boston" at 03 April 2021 15:24:18.'),
    ((T.TIMESTAMP, T.MAC_ADDRESS), {T.TIMESTAMP: "03 April 2021 15:24:18", T.MAC_ADDRESS: "34:C7:31:F8:61:3B"},
     "Device with MAC address 34:C7:31:F8:61:3B connected via Bluetooth on 03 April 2021 15:24:18."),
    ((T.HUMAN_NAME, T.TIMESTAMP), {T.HUMAN_NAME: "Marsha Mellos", T.TIMESTAMP: "03 April 2021 15:24:18"},
     "User interacted with Marsha Mellos on 03 April 2021 15:24:18."),
    ((T.HUMAN_NAME, T.APP_NAME), {T.HUMAN_NAME: "Marsha Mellos", T.APP_NAME: "Snapchat"},
     "User interacted with Marsha Mellos on Snapchat."),
    ((T.PHONE_NUMBER, T.APP_NAME), {T.PHONE_NUMBER: "+16506808040", T.APP_NAME: "Snapchat"},
     "The phone number +16506808040 is associated with Snapchat."),
    ((T.PHONE_NUMBER, T.EMAIL), {T.PHONE_NUMBER: "+14155550100", T.EMAIL: "pm.recovery@example.org"},
     "The email pm.recovery@example.org is associated with the phone number +14155550100."),
]


@pytest.mark.parametrize("pair,values,expected", HYPOTHESIS_ORACLE)
def test_hypothesis_sentences_exact(pair, values, expected):
    assert generate_hypothesis(pair, values) == expected


def test_hypothesis_covers_whole_taxonomy():
    covered = {pair for pair, _, _ in HYPOTHESIS_ORACLE}
    assert covered == set(EDGE_TAXONOMY)


def test_search_hypothesis_through_full_build():
    rec = _evidence(
        "aaaaaaaa_t_1",
        [
            _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome"),
            _a("aaaaaaaa_t_1", T.SEARCH_KEYWORD, "italianos near me"),
        ],
    )
    graph = build_graph([rec])
    assert graph.edges[0].hypothesis == 'User performed a Google search for "italianos near me" in Chrome.'


def test_isolated_groups_attributed_and_sorted():
    records = [
        _evidence(
            "aaaaaaaa_t_1",
            [_a("aaaaaaaa_t_1", T.MESSAGE, "hello")],
            path="/data/com.whatsapp/databases/",
        ),
        _evidence(
            "aaaaaaaa_t_2",
            [_a("aaaaaaaa_t_2", T.USERNAME, "wwhite62")],
            path="/data/com.android.chrome/databases/",
        ),
        _evidence("aaaaaaaa_t_3", [_a("aaaaaaaa_t_3", T.MESSAGE, "stray")], path="/backup/"),
        _evidence(
            "aaaaaaaa_t_4",
            [
                _a("aaaaaaaa_t_4", T.TIMESTAMP, "03 April 2021 15:24:18"),
                _a("aaaaaaaa_t_4", T.APP_NAME, "Chrome"),
            ],
            path="/data/com.android.chrome/databases/",
        ),
    ]
    graph = build_graph(records)
    assert [g.app_name for g in graph.isolated_groups] == ["(unattributed)", "Chrome", "WhatsApp"]
    by_name = {g.app_name: g.members for g in graph.isolated_groups}
    assert by_name["WhatsApp"] == ["Message|hello"]
    assert by_name["Chrome"] == ["Username|wwhite62"]
    # connected nodes never appear in isolated groups
    flat = list(itertools.chain.from_iterable(g.members for g in graph.isolated_groups))
    assert "App Name|Chrome" not in flat


def test_json_bytes_deterministic_and_parse_round_trip():
    records = [
        _evidence(
            "aaaaaaaa_t_1",
            [
                _a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18"),
                _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome"),
            ],
        ),
        _evidence("aaaaaaaa_t_2", [_a("aaaaaaaa_t_2", T.MESSAGE, "hello")]),
    ]
    g1 = build_graph(records)
    g2 = build_graph(list(records))
    assert g1.to_json_bytes() == g2.to_json_bytes()
    parsed = parse_graph_json(g1.to_json_bytes())
    assert parsed.nodes == g1.nodes
    assert parsed.edges == g1.edges
    assert parsed.isolated_groups == g1.isolated_groups


def test_to_dot_mentions_every_node_and_edge():
    rec = _evidence(
        "aaaaaaaa_t_1",
        [
            _a("aaaaaaaa_t_1", T.TIMESTAMP, "03 April 2021 15:24:18"),
            _a("aaaaaaaa_t_1", T.APP_NAME, "Chrome"),
        ],
    )
    graph = build_graph([rec])
    dot = to_dot(graph)
    assert dot.startswith("graph dfkg {")
    for n in graph.nodes:
        assert n.node_id in dot
    assert '--' in dot and "Timestamp-App Name" in dot


_TYPE_POOL = [T.TIMESTAMP, T.APP_NAME, T.EMAIL, T.SEARCH_KEYWORD, T.MESSAGE, T.PHONE_NUMBER]


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=1, max_value=6),  # record number
            st.sampled_from(_TYPE_POOL),
            st.sampled_from(["v1", "v2", "v3"]),
            st.integers(min_value=1, max_value=10),
        ),
        max_size=24,
    )
)
@settings(max_examples=100)
def test_edge_provenance_soundness_property(raw):
    by_rec = {}
    for rec_no, etype, val, conf in raw:
        uid = f"aaaaaaaa_t_{rec_no}"
        by_rec.setdefault(uid, []).append(_a(uid, etype, val, conf))
    records = [_evidence(uid, artifacts, lid=i + 1) for i, (uid, artifacts) in enumerate(sorted(by_rec.items()))]
    graph = build_graph(records, min_confidence=5)
    rec_types = {
        rec.uid: {
            (a.entity_type, normalize_value(a.entity_type, a.refined_value))
            for a in rec.artifacts
            if a.confidence >= 5
        }
        for rec in records
    }
    for edge in graph.edges:
        assert edge.type_pair in PAIR_LABELS
        assert edge.provenance, "edge with no provenance"
        for uid in edge.provenance:
            have = rec_types[uid]
            for nid in edge.endpoints:
                etype = next(n.entity_type for n in graph.nodes if n.node_id == nid)
                assert (etype, node_value(nid)) in have


def test_derive_edges_orders_by_taxonomy_then_endpoints():
    records = [
        _evidence(
            "aaaaaaaa_t_1",
            [
                _a("aaaaaaaa_t_1", T.PHONE_NUMBER, "+16506808040"),
                _a("aaaaaaaa_t_1", T.EMAIL, "x@y.com"),
            ],
        ),
        _evidence(
            "aaaaaaaa_t_2",
            [
                _a("aaaaaaaa_t_2", T.TIMESTAMP, "03 April 2021 15:24:18"),
                _a("aaaaaaaa_t_2", T.APP_NAME, "Chrome"),
            ],
        ),
    ]
    edges = derive_edges(records)
    assert [e.type_pair for e in edges] == ["Timestamp-App Name", "Phone Number-Email"]
