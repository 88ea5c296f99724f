#!/usr/bin/env python3
"""
Simple script to start the rci-secrecy FastAPI server.
"""

import os
import sys

import uvicorn

# Add the services package to the Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from services.src.initial_setup.env_config import config  # noqa: E402

if __name__ == "__main__":
    print("🚀 Starting RCI Secrecy API Server...")
    print(f"📋 API Docs: http://localhost:{config.API_PORT}/docs")
    print(f"🔍 Health Check: http://localhost:{config.API_PORT}/health")
    print(f"\n⚙️  Monte Carlo requests are capped at {config.API_MAX_TRIALS} trials (SECRECY_API_MAX_TRIALS)")
    print("\n🛑 Press Ctrl+C to stop the server\n")

    uvicorn.run(
        "services.src.api:app",
        host=config.API_HOST,
        port=config.API_PORT,
        reload=True,
        log_level="info",
    )
