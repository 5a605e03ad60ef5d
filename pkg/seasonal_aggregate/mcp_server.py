"""
Seasonal Aggregate MCP Server - Model Context Protocol server for spectral
modelling of aggregated seasonal long-memory series.
Provides tools for evaluating spectra, fitting, uncertainty, simulation and forecasting.
"""

import json
import logging
from typing import Any, Dict

import numpy as np
from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from .asymptotics import asymptotic_intervals, fisher_information
from .config import get_config
from .forecast import predict
from .model import (
    DiffOrders,
    format_json,
    model_orders_from_kv,
    orders_from_kv,
    params_from_kv,
    spec_from_kv,
    validate,
)
from .sample import acf, periodogram, seasonal_difference
from .simulate import McConfig, simulate_aggregate
from .spectra import SpectrumKind, normalization_constant, spectral_density
from .whittle import fit

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

# Initialize server
app = Server("seasonal-aggregate-mcp")

# Global variable for domain filtering (set by main())
SELECTED_DOMAINS: set[str] | None = None

# Tool categorization by domain
TOOL_DOMAINS = {
    # Spectra domain - density evaluation and periodograms
    "spectra": {
        "evaluate_spectrum",
        "normalization_constant",
        "compute_periodogram",
        "compute_acf",
        "validate_parameters",
    },
    # Estimation domain - Whittle fits and their uncertainty
    "estimation": {
        "fit_model",
        "fisher_information",
    },
    # Simulation domain
    "simulation": {
        "simulate_series",
    },
    # Forecasting domain
    "forecasting": {
        "forecast_series",
    },
    # Composite domain for convenience
    "core": {  # Essential operations (spectrum + fit)
        "evaluate_spectrum",
        "fit_model",
    },
}

# Validate configuration on startup
try:
    config = get_config()
    logger.info(f"Seasonal Aggregate MCP Server initialized: {config}")
except Exception as e:
    logger.error(f"Failed to initialize configuration: {e}")
    raise


_MODEL_PROPERTIES = {
    "z": {"type": "array", "items": {"type": "integer"}, "description": "Aggregate-scale periods, e.g. [10]"},
    "m": {"type": "integer", "description": "Aggregation size (omit for the limiting model)"},
    "d": {"type": "number", "description": "Regular fractional order"},
    "D": {"type": "array", "items": {"type": "number"}, "description": "Seasonal fractional orders, one per period"},
    "sigma2": {"type": "number", "description": "Innovation variance (default 1)"},
    "phi": {"type": "array", "items": {"type": "number"}, "description": "Regular AR coefficients"},
    "r": {"type": "integer", "description": "Regular differencing order (default 0)"},
    "R": {"type": "array", "items": {"type": "integer"}, "description": "Seasonal differencing orders"},
    "kind": {"type": "string", "description": "Density: limiting (default), sarfima or aggregate:<m>"},
}

_SERIES_PROPERTY = {"type": "array", "items": {"type": "number"}, "description": "Observations"}


def _flatten(arguments: Dict[str, Any]) -> Dict[str, Any]:
    """Expand list arguments D and R into the indexed keys of the key-value format."""
    flat = {k: v for k, v in arguments.items() if k not in ("D", "R")}
    for key in ("D", "R"):
        for j, value in enumerate(arguments.get(key) or [], start=1):
            flat[f"{key}.{j}"] = value
    return flat


def _model(arguments: Dict[str, Any]):
    flat = _flatten(arguments)
    spec = spec_from_kv(flat)
    params = params_from_kv({k: v for k, v in flat.items() if k in ("d", "sigma2", "phi") or k.startswith("D.")},
                            c=spec.c)
    R = orders_from_kv(flat, spec.c, K=max([2, flat.get("r", 0)] + list(arguments.get("R") or [])))
    kind = SpectrumKind.parse(arguments.get("kind", "limiting"))
    return spec, params, R, kind


@app.list_tools()
async def list_tools() -> list[Tool]:
    """List all available tools (with optional domain filtering)."""
    all_tools = [
        Tool(
            name="evaluate_spectrum",
            description="Evaluate a model spectral density (limiting aggregate, finite-m aggregate or SARFIMA) at given frequencies in (0, π].",
            inputSchema={
                "type": "object",
                "properties": {
                    **_MODEL_PROPERTIES,
                    "omega": {"type": "array", "items": {"type": "number"}, "description": "Frequencies"},
                },
                "required": ["omega"],
            },
        ),
        Tool(
            name="normalization_constant",
            description="Normalization constant K = 1/∫f* of the limiting aggregate density.",
            inputSchema={"type": "object", "properties": dict(_MODEL_PROPERTIES)},
        ),
        Tool(
            name="compute_periodogram",
            description="Periodogram of the differenced series at the Fourier frequencies.",
            inputSchema={
                "type": "object",
                "properties": {**_MODEL_PROPERTIES, "series": _SERIES_PROPERTY},
                "required": ["series"],
            },
        ),
        Tool(
            name="compute_acf",
            description="Sample autocorrelations of the differenced series.",
            inputSchema={
                "type": "object",
                "properties": {
                    **_MODEL_PROPERTIES,
                    "series": _SERIES_PROPERTY,
                    "max_lag": {"type": "integer", "description": "Largest lag (default min(40, N-1))"},
                },
                "required": ["series"],
            },
        ),
        Tool(
            name="fit_model",
            description="Whittle fit over all differencing cells; returns estimates, selected orders, AIC and asymptotic intervals.",
            inputSchema={
                "type": "object",
                "properties": {
                    **_MODEL_PROPERTIES,
                    "series": _SERIES_PROPERTY,
                    "K": {"type": "integer", "description": "Differencing order bound (default 2)"},
                    "ar_order": {"type": "integer", "description": "Seasonal AR order of the first component"},
                    "ma_order": {"type": "integer", "description": "Seasonal MA order of the first component"},
                },
                "required": ["series", "z"],
            },
        ),
        Tool(
            name="fisher_information",
            description="Fisher information matrix and standard errors at given parameters.",
            inputSchema={
                "type": "object",
                "properties": {**_MODEL_PROPERTIES, "N": {"type": "integer", "description": "Sample size (default 512)"}},
            },
        ),
        Tool(
            name="forecast_series",
            description="Fit the limiting model and forecast h steps ahead with MSEs.",
            inputSchema={
                "type": "object",
                "properties": {
                    **_MODEL_PROPERTIES,
                    "series": _SERIES_PROPERTY,
                    "h": {"type": "integer", "description": "Horizon", "minimum": 1},
                },
                "required": ["series", "z", "h"],
            },
        ),
        Tool(
            name="simulate_series",
            description="Simulate an aggregate series of N values plus burn-in from a finite-m aggregate model.",
            inputSchema={
                "type": "object",
                "properties": {
                    **_MODEL_PROPERTIES,
                    "phi1": {"type": "number", "description": "Fine-scale AR(1) coefficient"},
                    "sigma": {"type": "number", "description": "Innovation standard deviation"},
                    "N": {"type": "integer", "description": "Sample size (default 512)"},
                    "seed": {"type": "integer", "description": "Seed (default 0)"},
                },
                "required": ["z", "m"],
            },
        ),
        Tool(
            name="validate_parameters",
            description="Check parameter constraints (fractional orders, unit roots, common roots).",
            inputSchema={"type": "object", "properties": dict(_MODEL_PROPERTIES)},
        ),
    ]

    # Apply domain filtering if specified
    if SELECTED_DOMAINS is None:
        return all_tools

    enabled_tools = set()
    for domain in SELECTED_DOMAINS:
        if domain in TOOL_DOMAINS:
            enabled_tools.update(TOOL_DOMAINS[domain])
        else:
            logger.warning(f"Unknown domain: {domain}")

    filtered_tools = [tool for tool in all_tools if tool.name in enabled_tools]

    logger.info(f"Filtered tools: {len(filtered_tools)}/{len(all_tools)} tools enabled")
    return filtered_tools


def _fit(arguments: Dict[str, Any]):
    spec, _, _, kind = _model(arguments)
    K = int(arguments.get("K", 2))
    orders = model_orders_from_kv(
        {"ar_order.1": arguments.get("ar_order", 0), "ma_order.1": arguments.get("ma_order", 0)},
        spec.c,
    )
    return fit(arguments["series"], spec, bounds=DiffOrders(K, (K,) * spec.c, K), kind=kind, orders=orders)


def handle_tool(name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
    """Run one tool and return a JSON-serializable result."""
    if name == "evaluate_spectrum":
        spec, params, R, kind = _model(arguments)
        density = spectral_density(kind, params, R, spec)
        values = density(np.asarray(arguments["omega"], dtype=float).ravel())
        return {"omega": arguments["omega"], "density": np.atleast_1d(values).tolist()}
    if name == "normalization_constant":
        spec, params, R, _ = _model(arguments)
        return {"K": normalization_constant(params, R, spec, get_config().spectrum_config())}
    if name == "compute_periodogram":
        spec, _, R, _ = _model(arguments)
        pg = periodogram(seasonal_difference(arguments["series"], R, spec))
        return {"omega": pg.freqs.tolist(), "I": pg.ordinates.tolist(), "N": pg.n}
    if name == "compute_acf":
        spec, _, R, _ = _model(arguments)
        u = seasonal_difference(arguments["series"], R, spec)
        max_lag = int(arguments.get("max_lag", min(40, u.size - 1)))
        return {"acf": acf(u, max_lag).tolist(), "N": int(u.size)}
    if name == "fit_model":
        result = _fit(arguments)
        intervals = asymptotic_intervals(result)
        return {
            "estimates": result.estimates(),
            "r": result.R.r,
            "R": list(result.R.R),
            "aic": result.aic,
            "n_used": result.n_used,
            "warnings": result.warnings,
            "intervals": {iv.name: [iv.lower, iv.upper] for iv in intervals},
        }
    if name == "fisher_information":
        spec, params, R, kind = _model(arguments)
        info = fisher_information(params, R, spec, kind=kind)
        return {
            "names": info.names,
            "gamma": info.matrix.tolist(),
            "standard_errors": info.standard_errors(int(arguments.get("N", 512))),
            "singular": info.singular,
        }
    if name == "forecast_series":
        result = _fit(arguments)
        fc = predict(arguments["series"], result, int(arguments["h"]))
        return {"point": fc.point.tolist(), "mse": fc.mse.tolist(), "model": fc.model}
    if name == "simulate_series":
        spec, params, _, _ = _model(arguments)
        cfg = McConfig(
            d=params.d,
            D=params.D,
            phi1=float(arguments.get("phi1", 0.0)),
            sigma=float(arguments.get("sigma", 2.0)),
            z=spec.z,
            m=spec.m,
            N=int(arguments.get("N", 512)),
            seed=int(arguments.get("seed", 0)),
        )
        return {"series": simulate_aggregate(cfg).tolist(), "burn_in": cfg.burn_in}
    if name == "validate_parameters":
        spec, params, _, _ = _model(arguments)
        report = validate(params, spec)
        return {"ok": report.ok, "errors": report.errors, "warnings": report.warnings}
    raise ValueError(f"Unknown tool: {name}")


@app.call_tool()
async def call_tool(name: str, arguments: Any) -> list[TextContent]:
    """Handle tool calls."""
    try:
        result = handle_tool(name, arguments or {})
        return [TextContent(type="text", text=json.dumps(format_json(result), default=float))]
    except Exception as e:
        logger.error(f"Error executing tool {name}: {e}")
        return [TextContent(type="text", text=f"Error: {str(e)}")]


async def main():
    """Main entry point for MCP server."""
    import argparse
    global SELECTED_DOMAINS

    parser = argparse.ArgumentParser(
        description="Seasonal Aggregate MCP Server",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "-d", "--domains",
        nargs="*",
        default=None,
        help="Domains to enable (default: all). Options: spectra, estimation, simulation, forecasting, core",
    )

    args = parser.parse_args()

    if args.domains:
        SELECTED_DOMAINS = set(args.domains)
        logger.info(f"Domain filtering enabled: {SELECTED_DOMAINS}")
    else:
        SELECTED_DOMAINS = None
        logger.info("All domains enabled (no filtering)")

    async with stdio_server() as (read_stream, write_stream):
        await app.run(read_stream, write_stream, app.create_initialization_options())


if __name__ == "__main__":
    import asyncio
    asyncio.run(main())
