"""
Semantic resolver: source registry and its HTTP service.
"""

from .registry import Registration, Registry, Resolution, SourceScore
from .service import create_resolver_app

__all__ = ['Registration', 'Registry', 'Resolution', 'SourceScore', 'create_resolver_app']
