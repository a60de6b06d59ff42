# app/routes/health/health.py

import psutil
from flask import Blueprint
from http import HTTPStatus
from app.utils.response_template import response_template
from config import Config

health_bp = Blueprint('health', __name__)

@health_bp.route('/health', methods=['GET'])
def health():
    """
    Service status with host load figures.

    Returns:
        JSON response with status, cpu and memory usage and the configured worker count.
    """
    memory = psutil.virtual_memory()
    return response_template(
        message="ok",
        data={
            "status": "ok",
            "cpu_percent": psutil.cpu_percent(interval=None),
            "memory_percent": memory.percent,
            "cpu_count": psutil.cpu_count(),
            "workers": Config.WORKERS,
        },
        status_code=HTTPStatus.OK
    )
