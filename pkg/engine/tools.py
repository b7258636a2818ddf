"""Handlers behind the CLI verbs: one method per verb, plain data out"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from engine.integrator import IntegrationResult, integrate_many, verify_integration
from engine.jobs import ResolvedJob, load_job, resolve_job
from localization.equivariant import EdgeOrientation
from localization.graphs import count_decorated_graphs, decorated_graphs
from toric.cycles import mori_generators, moment_graph, nef_generators, pair
from utils.env_utils import EngineConfig

logger = logging.getLogger(__name__)


class ToricTools:
    """Job-file driven operations; CLI flags override the job, the job overrides the config"""

    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        self._resolved: Dict[Path, ResolvedJob] = {}

    def resolve(self, job_path: Union[str, Path]) -> ResolvedJob:
        """Load and resolve a job file once per path"""
        path = Path(job_path)
        if path not in self._resolved:
            self._resolved[path] = resolve_job(load_job(path))
        return self._resolved[path]

    def get_moment_graph(self, job_path: Union[str, Path]) -> Dict[str, Any]:
        """
        Moment graph of the job's fan with 1-based cone indices

        Returns:
            Dictionary with rays, cones and one entry per wall
        """
        fan = self.resolve(job_path).fan
        graph = moment_graph(fan)
        entries = []
        for i, j in graph.edges():
            wall, curve = graph[i, j]
            entries.append({
                "i": i + 1,
                "j": j + 1,
                "facet": [k + 1 for k in wall.facet_rays],
                "pairing": list(curve.pairing),
            })
        return {
            "rays": [list(ray) for ray in fan.rays],
            "cones": [[k + 1 for k in cone] for cone in fan.max_cones],
            "entries": entries,
        }

    def get_nef(self, job_path: Union[str, Path]) -> Dict[str, Any]:
        """
        Nef generators and their pairings with the Mori generators

        Raises:
            NotProjective: If the fan is not projective
        """
        fan = self.resolve(job_path).fan
        nef = nef_generators(fan)
        mori = mori_generators(fan)
        return {
            "nef": [list(d.coeffs) for d in nef],
            "mori": [list(c.pairing) for c in mori],
            "pairings": [[pair(d, c) for c in mori] for d in nef],
        }

    def list_graphs(self, job_path: Union[str, Path]) -> List[str]:
        resolved = self.resolve(job_path)
        return [g.describe() for g in decorated_graphs(resolved.fan, resolved.beta, resolved.m)]

    def count_graphs(self, job_path: Union[str, Path]) -> int:
        resolved = self.resolve(job_path)
        count = count_decorated_graphs(resolved.fan, resolved.beta, resolved.m)
        logger.info("%d decorated graphs for beta=%s, m=%d", count, list(resolved.beta.pairing), resolved.m)
        return count

    def run_job(self, job_path: Union[str, Path], seed: Optional[int] = None, workers: Optional[int] = None,
                verify: Optional[bool] = None, orientation: EdgeOrientation = EdgeOrientation.LOWER_FIRST,
                progress: Optional[bool] = None) -> List[IntegrationResult]:
        """
        Parse, validate and integrate every integrand of a job

        Returns:
            One IntegrationResult per integrand, in file order

        Raises:
            ToricGWError: Any job, fan, parse or integration failure
        """
        resolved = self.resolve(job_path)
        job = resolved.job
        seed = seed if seed is not None else (job.seed if job.seed is not None else self.config.seed)
        verify = verify if verify is not None else job.verify
        options = dict(
            workers=workers if workers is not None else self.config.workers,
            orientation=orientation,
            max_attempts=self.config.max_attempts,
            progress=progress if progress is not None else self.config.progress,
        )
        logger.info("Running %s with seed %s, %d worker(s), verify=%s", job_path, seed, options["workers"], verify)
        if verify:
            return verify_integration(resolved.fan, resolved.beta, resolved.m, resolved.exprs, seed, **options)
        return integrate_many(resolved.fan, resolved.beta, resolved.m, resolved.exprs, seed, **options)
