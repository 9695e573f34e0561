"""Federated querying over CSV-backed hospital sites."""

from .coordinator import (Federation, FederatedResult, execute_federated, format_audit, format_wire,
                          load_federation)
from .localplan import LocalPlan, parse_sql, render_sql, translate_to_local_plan
from .mapping import (AccessPolicyRule, ColumnMapping, ConsentRecord, SiteDescriptor, TableMapping, Template,
                      descriptor_from_dict, descriptor_to_dict, lift_site, load_site_descriptor)
from .planner import CapabilityIndex, FederatedPlan, decompose
from .site import AuditEntry, Site
from .wire import WireMessage, decode_request, decode_response

__all__ = [
    "AccessPolicyRule", "AuditEntry", "CapabilityIndex", "ColumnMapping", "ConsentRecord", "FederatedPlan",
    "FederatedResult", "Federation", "LocalPlan", "Site", "SiteDescriptor", "TableMapping", "Template",
    "WireMessage", "decode_request", "decode_response", "decompose", "descriptor_from_dict",
    "descriptor_to_dict", "execute_federated", "format_audit", "format_wire", "lift_site",
    "load_federation", "load_site_descriptor", "parse_sql", "render_sql", "translate_to_local_plan",
]
