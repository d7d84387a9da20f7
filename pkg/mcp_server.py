#!/usr/bin/env python3
"""
panowarp MCP Server - Direct MCP Protocol Entry Point

Connects the panowarp tools to an MCP client over stdio, bypassing the
FastAPI layer.
"""
import os
import sys
import asyncio

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), 'src')))

from panowarp.server import run_stdio


async def main():
    """Main entry point for MCP server."""
    try:
        await run_stdio()
    except Exception as e:
        print(f"Server error: {e}", file=sys.stderr, flush=True)
        raise
    finally:
        print("panowarp MCP server shut down", file=sys.stderr, flush=True)

if __name__ == "__main__":
    asyncio.run(main())
