import os
import json
from flask import Flask
from app.routes.health.health import health_bp
from app.routes.spectrum.spectrum import spectrum_bp
from app.routes.verify.verify import verify_bp
from app.routes.apps.apps import apps_bp
from app.routes.oracle.oracle import oracle_bp
from app.routes.runs.runs import runs_bp
from app.cli import cli
from config import init_db
from flask_cors import CORS
from flasgger import Swagger

def create_app():
    app = Flask(__name__)
    CORS(app)

    app.static_folder = 'static'
    app.secret_key = os.urandom(24)

    swagger_template_path = os.path.join(app.root_path, 'static', 'swagger.json')

    # Swagger configuration
    with open(swagger_template_path, 'r') as f:
        swagger_template = json.load(f)

    swagger_config = {
        "headers": [],
        "specs": [
            {
                "endpoint": 'swagger',
                "route": '/swagger.json',
                "rule_filter": lambda rule: True,
                "model_filter": lambda tag: True,
            }
        ],
        "static_url_path": "/flasgger_static",
        "swagger_ui": True,
        "specs_route": "/docs/",
        "title": "ffincidence",
        "description": "Exact incidence counts and bound checks over finite fields",
        "swagger_ui_config": {
            "docExpansion": "none",
            "tagsSorter": "alpha"
        }
    }

    Swagger(app, template=swagger_template, config=swagger_config)

    init_db()

    app.name = 'ffincidence'
    app.register_blueprint(health_bp)
    app.register_blueprint(spectrum_bp)
    app.register_blueprint(verify_bp)
    app.register_blueprint(apps_bp)
    app.register_blueprint(oracle_bp)
    app.register_blueprint(runs_bp)
    app.cli.add_command(cli)
    return app
