"""Map SNOMED-CT-style clinical finding concepts to VCM icon codes.

The mapping is anchor based: a small curated table links terminology
concepts to medical concepts of the VCM ontology, and everything else is
derived by walking the terminology graph.
"""

from vcmmap.anchors import AnchorEntry, AnchorTable, detect_ambiguities, load_anchors, resolve
from vcmmap.engine import IconSet, assemble, batch_generate, generate_icons
from vcmmap.errors import MappingError
from vcmmap.terminology import TerminologyGraph, load_terminology
from vcmmap.vcm import Icon, VcmOntology, icon_code, load_vcm_ontology, parse_icon_code

__all__ = [
    "AnchorEntry",
    "AnchorTable",
    "Icon",
    "IconSet",
    "MappingError",
    "TerminologyGraph",
    "VcmOntology",
    "assemble",
    "batch_generate",
    "detect_ambiguities",
    "generate_icons",
    "icon_code",
    "load_anchors",
    "load_terminology",
    "load_vcm_ontology",
    "parse_icon_code",
    "resolve",
]

__version__ = "0.1.0"
