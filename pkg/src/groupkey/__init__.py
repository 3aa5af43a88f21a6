"""Tree-based group key agreement with totient-blinded Diffie-Hellman keys and
an LDPC-protected rekey channel."""

from .channel import ChannelModel, transmit
from .keytree import KeyTree, compute_group_key, join, leave
from .modmath import GroupParams, euler_totient, mod_exp
from .protocol import SimConfig, audit_secrecy, load_config, run_scenario

__all__ = [
    "ChannelModel",
    "GroupParams",
    "KeyTree",
    "SimConfig",
    "audit_secrecy",
    "compute_group_key",
    "euler_totient",
    "join",
    "leave",
    "load_config",
    "mod_exp",
    "run_scenario",
    "transmit",
]
