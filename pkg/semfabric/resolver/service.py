"""
Resolver HTTP service.

    POST   /register              register or replace a source manifest
    POST   /resolve               rank sources for a query under constraints
    GET    /sources               all registrations in source_id order
    DELETE /sources/<source_id>   remove a registration
    GET    /healthz               liveness
"""

import logging

from flask import Flask, Response, request

from ..errors import ValidationFailed
from ..wire import (
    ManifestModel,
    ResolveRequestModel,
    SourceManifest,
    constraints_from_model,
    error_body,
    parse_body,
    render,
)
from .registry import Registry

logger = logging.getLogger(__name__)

JSON = "application/json"


def _json(body: bytes, status: int = 200) -> Response:
    return Response(body, status=status, mimetype=JSON)


def create_resolver_app(registry: Registry) -> Flask:
    """Flask app exposing a Registry."""
    app = Flask(__name__)

    @app.get("/healthz")
    def healthz():
        return _json(render({"status": "ok", "sources": len(registry)}))

    @app.post("/register")
    def register():
        try:
            model = parse_body(request.get_data(), ManifestModel)
        except ValidationFailed as e:
            return _json(error_body(str(e), fields=e.fields), 400)
        reg = registry.register(SourceManifest.from_dict(model.model_dump()))
        return _json(render({
            "status": "registered",
            "source_id": reg.manifest.source_id,
            "registered_at": reg.registered_at,
            "registry_size": len(registry),
        }))

    @app.post("/resolve")
    def resolve():
        try:
            req = parse_body(request.get_data(), ResolveRequestModel)
        except ValidationFailed as e:
            return _json(error_body(str(e), fields=e.fields), 400)
        resolution = registry.resolve(req.query, req.s, constraints_from_model(req.constraints))
        return _json(render(resolution.to_dict()))

    @app.get("/sources")
    def sources():
        return _json(render({
            "sources": [
                {"manifest": r.manifest.to_dict(), "registered_at": r.registered_at}
                for r in registry.list_sources()
            ]
        }))

    @app.delete("/sources/<source_id>")
    def deregister(source_id):
        if not registry.deregister(source_id):
            return _json(error_body("unknown_source", detail=source_id), 404)
        return _json(render({"status": "deregistered", "source_id": source_id}))

    @app.errorhandler(404)
    def not_found(_):
        return _json(error_body("not_found"), 404)

    @app.errorhandler(405)
    def not_allowed(_):
        return _json(error_body("method_not_allowed"), 405)

    return app
