import pytest
from hypothesis import settings

from cautiousbp import compile_network, hard_finding, network_from_document

settings.register_profile("suite", max_examples=50, deadline=None, derandomize=True)
settings.load_profile("suite")

CHAIN3_DOC = {
    "variables": [
        {"name": "A", "states": ["t", "f"]},
        {"name": "B", "states": ["t", "f"]},
        {"name": "C", "states": ["t", "f"]},
    ],
    "cpds": [
        {"variable": "A", "parents": [], "values": [0.4, 0.6]},
        {"variable": "B", "parents": ["A"], "values": [0.9, 0.2, 0.1, 0.8]},
        {"variable": "C", "parents": ["B"], "values": [0.7, 0.1, 0.3, 0.9]},
    ],
}


def hard(fid, variable, state):
    return hard_finding(fid, variable, ("t", "f"), state)


@pytest.fixture(scope="session")
def chain3_net():
    return network_from_document(CHAIN3_DOC)


@pytest.fixture(scope="session")
def chain3_tree(chain3_net):
    return compile_network(chain3_net)
