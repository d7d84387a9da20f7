#!/usr/bin/env python3
"""
panowarp MCP Server

Exposes the panowarp engine as tools, enabling LLM agents to:
- Warp a panorama to a new viewpoint and measure disocclusion holes
- Convert between equirectangular and cubemap layouts
- Inpaint holes and run progressive novel view inpainting (PNVI)
- Export perspective views and a sparse model for 3D reconstruction
- Build the spherical mask dataset and run the full pipeline

Every tool is also served as a plain POST route by the FastAPI app.
Settings come from PANOWARP_* environment variables (and .env).
"""
import sys

from . import instances
from .config import load_settings
from .handlers import (
    panowarp_c2e, panowarp_dataset, panowarp_e2c, panowarp_inpaint, panowarp_mvp, panowarp_pipeline,
    panowarp_pnvi, panowarp_stats, panowarp_warp
)
from .models import (
    C2EInput, DatasetInput, E2CInput, InpaintInput, MvpInput, PipelineInput, PnviInput, StatsInput, WarpInput
)
from mcp.server.fastmcp import FastMCP
from fastapi import FastAPI, APIRouter, Body

mcp = FastMCP("panowarp")

# ==================== MCP TOOLS ====================

@mcp.tool("panowarp_warp")
async def mcp_warp(params: WarpInput):
    """Forward-warp a panorama + depth to a new translation; writes image, depth and hole mask."""
    return await panowarp_warp(params)

@mcp.tool("panowarp_stats")
async def mcp_stats(params: StatsInput):
    """Hole ratio of a mask, or a hole-ratio sweep along one axis."""
    return await panowarp_stats(params)

@mcp.tool("panowarp_e2c")
async def mcp_e2c(params: E2CInput):
    """Split an equirectangular panorama (or hole mask) into six cubemap faces."""
    return await panowarp_e2c(params)

@mcp.tool("panowarp_c2e")
async def mcp_c2e(params: C2EInput):
    """Reassemble six cubemap faces into an equirectangular panorama."""
    return await panowarp_c2e(params)

@mcp.tool("panowarp_inpaint")
async def mcp_inpaint(params: InpaintInput):
    """Fill the masked pixels of one image with the chosen backend."""
    return await panowarp_inpaint(params)

@mcp.tool("panowarp_pnvi")
async def mcp_pnvi(params: PnviInput):
    """Progressive novel view inpainting from the panorama center to one target pose."""
    return await panowarp_pnvi(params)

@mcp.tool("panowarp_mvp")
async def mcp_mvp(params: MvpInput):
    """Perspective views, camera poses and a point cloud from a PNVI manifest."""
    return await panowarp_mvp(params)

@mcp.tool("panowarp_dataset")
async def mcp_dataset(params: DatasetInput):
    """Synthesize RGB/mask cubemap faces for inpainting training."""
    return await panowarp_dataset(params)

@mcp.tool("panowarp_pipeline")
async def mcp_pipeline(params: PipelineInput):
    """Run PNVI over a pose set and export the sparse model, from one JSON config."""
    return await panowarp_pipeline(params)

# ==================== HTTP ROUTES ====================

router = APIRouter()

@router.post("/panowarp_warp")
async def warp_endpoint(params: WarpInput = Body(...)):
    """Forward-warp a panorama to a new translation."""
    return await panowarp_warp(params)

@router.post("/panowarp_stats")
async def stats_endpoint(params: StatsInput = Body(...)):
    """Hole statistics."""
    return await panowarp_stats(params)

@router.post("/panowarp_e2c")
async def e2c_endpoint(params: E2CInput = Body(...)):
    return await panowarp_e2c(params)

@router.post("/panowarp_c2e")
async def c2e_endpoint(params: C2EInput = Body(...)):
    return await panowarp_c2e(params)

@router.post("/panowarp_inpaint")
async def inpaint_endpoint(params: InpaintInput = Body(...)):
    """Fill the holes of one image."""
    return await panowarp_inpaint(params)

@router.post("/panowarp_pnvi")
async def pnvi_endpoint(params: PnviInput = Body(...)):
    """Progressive novel view inpainting to one pose."""
    return await panowarp_pnvi(params)

@router.post("/panowarp_mvp")
async def mvp_endpoint(params: MvpInput = Body(...)):
    return await panowarp_mvp(params)

@router.post("/panowarp_dataset")
async def dataset_endpoint(params: DatasetInput = Body(...)):
    return await panowarp_dataset(params)

@router.post("/panowarp_pipeline")
async def pipeline_endpoint(params: PipelineInput = Body(...)):
    """Run the end-to-end pipeline."""
    return await panowarp_pipeline(params)

# Expose the FastMCP app as an ASGI application
mcp_asgi_app = mcp.streamable_http_app()

app = FastAPI(
    title="panowarp",
    description="Panoramic novel-view synthesis tools over HTTP and MCP.",
    version="0.1.0",
)

# Routes first, so the catch-all MCP mount does not shadow them
app.include_router(router)
app.mount("/", mcp_asgi_app)

# ==================== SERVER LIFECYCLE ====================

def initialize_server() -> None:
    """Load settings into the shared instances."""
    try:
        instances.settings = load_settings()
        print(f"panowarp initialized (threads={instances.settings.threads}, "
              f"backend={instances.settings.backend})", file=sys.stderr, flush=True)
    except Exception as e:
        print(f"Failed to initialize server: {e}", file=sys.stderr, flush=True)
        raise


@app.on_event("startup")
async def startup_event():
    initialize_server()


@app.on_event("shutdown")
async def shutdown_event():
    """Drop cached sampling grids on shutdown."""
    instances.grid_cache.invalidate()
    print("panowarp server shut down", file=sys.stderr, flush=True)


async def run_stdio() -> None:
    """Serve the MCP tools over stdio until the client disconnects."""
    if instances.settings is None:
        initialize_server()
    print("Waiting for MCP protocol messages...", file=sys.stderr, flush=True)
    try:
        await mcp.run_stdio_async()
    finally:
        instances.grid_cache.invalidate()
