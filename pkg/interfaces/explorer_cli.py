"""
Interactive Explorer - menu-driven tour of manifolds, counts, trigonometric
majorants, Legendre duality and the exponent calculus
"""

from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import questionary
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from counting import lattice
from counting.weights import Ball, DeltaVector, standard_weight
from exponents import calculus
from geometry import manifold
from geometry.legendre import DualFamily, involution_residual
from harmonic import trig
from utils.errors import ExplorerError


class RationalPointsExplorer:
    """Command-line explorer around one current manifold"""

    def __init__(self):
        self.console = Console()
        self.current_spec: Optional[manifold.ManifoldSpec] = None

    def run(self):
        """Main entry point"""
        self.show_welcome()

        while True:
            choice = self.main_menu()

            if choice in (None, "Exit"):
                self.console.print("\n[yellow]Goodbye![/yellow]")
                break

            try:
                self.handle_choice(choice)
            except ExplorerError as exc:
                self.console.print(f"[red]{exc}[/red]")

    def show_welcome(self):
        self.console.print(Panel(
            "[bold cyan]Rational points near manifolds[/bold cyan]\n\n"
            "Explore:\n"
            "• Curvature of built-in manifolds\n"
            "• Sharp, smoothed and on-manifold counts\n"
            "• Selberg majorants and the Fejér kernel\n"
            "• Legendre duals and the exponent calculus",
            title="Rational Points Explorer",
            border_style="bold green"
        ))

    def main_menu(self) -> str:
        choices = [
            "Manifold Explorer",
            "Counting Lab",
            "Selberg & Fejér",
            "Legendre Duality",
            "Exponent Calculus",
            "Exit"
        ]
        return questionary.select("What would you like to explore?", choices=choices).ask()

    def handle_choice(self, choice: str):
        handlers = {
            "Manifold Explorer": self.manifold_explorer,
            "Counting Lab": self.counting_lab,
            "Selberg & Fejér": self.selberg_fejer,
            "Legendre Duality": self.legendre_duality,
            "Exponent Calculus": self.exponent_calculus,
        }
        handlers[choice]()

    def _ask(self, prompt: str, default: str, cast: Callable = int):
        answer = questionary.text(prompt, default=default).ask()
        return cast(answer if answer is not None else default)

    def _require_spec(self) -> manifold.ManifoldSpec:
        if self.current_spec is None:
            self.console.print("[yellow]No manifold selected, using the paraboloid in dimension 2[/yellow]")
            self.current_spec = manifold.paraboloid(2)
        return self.current_spec

    # menus

    def manifold_explorer(self):
        self.console.print("\n[bold cyan]Manifold Explorer[/bold cyan]")
        family = questionary.select(
            "Select a family:",
            choices=["paraboloid", "diag-quadric", "complex-squaring", "Back"]
        ).ask()
        if family in (None, "Back"):
            return

        if family == "paraboloid":
            self.current_spec = manifold.paraboloid(self._ask("Dimension n:", "2"))
        elif family == "diag-quadric":
            raw = self._ask("Coefficients c (comma separated):", "2,1", str)
            self.current_spec = manifold.diag_quadric([Fraction(v) for v in raw.split(",")])
        else:
            self.current_spec = manifold.complex_squaring()
        self.display_curvature()

    def display_curvature(self):
        spec = self._require_spec()
        report = manifold.check_curvature(spec)

        table = Table(title=f"{spec.family.value} (n={spec.n}, R={spec.R})")
        table.add_column("Property", style="cyan")
        table.add_column("Value", style="yellow")
        for key, value in report.get_status().items():
            table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
        table.add_row("RH(n)", str(manifold.radon_hurwitz(spec.n)))
        self.console.print(table)

    def counting_lab(self):
        self.console.print("\n[bold cyan]Counting Lab[/bold cyan]")
        spec = self._require_spec()
        kind = questionary.select(
            "Counting function:",
            choices=["sharp", "smoothed", "on-manifold", "Back"]
        ).ask()
        if kind in (None, "Back"):
            return

        Q = self._ask("Q:", "20")
        domain = Ball(spec.x0, spec.eps0)
        with self.console.status("Enumerating lattice points..."):
            if kind == "on-manifold":
                result = lattice.count_on_manifold(spec, domain, Q)
            else:
                delta = DeltaVector.uniform(self._ask("δ:", "0.1", float), spec.R)
                if kind == "sharp":
                    result = lattice.count_sharp(spec, domain, Q, delta)
                else:
                    result = lattice.count_smoothed(spec, standard_weight(spec), Q, delta)

        table = Table(title=f"{kind} count")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="yellow")
        for key, value in result.get_status().items():
            table.add_row(key, str(value))
        self.console.print(table)

    def selberg_fejer(self):
        self.console.print("\n[bold cyan]Selberg & Fejér[/bold cyan]")
        action = questionary.select(
            "Construction:",
            choices=["Selberg pair", "Fejér kernel", "Back"]
        ).ask()

        if action == "Selberg pair":
            alpha = self._ask("α:", "-0.1", float)
            beta = self._ask("β:", "0.1", float)
            J = self._ask("Degree J:", "8")
            minus, plus = trig.selberg_pair(alpha, beta, J)
            table = Table(title=f"Selberg pair on [{alpha}, {beta}], J={J}")
            table.add_column("j", style="cyan")
            table.add_column("ĉ₋(j)", style="yellow")
            table.add_column("ĉ₊(j)", style="yellow")
            for j in range(-J, J + 1):
                table.add_row(str(j), f"{minus.coefficient(j):.6f}", f"{plus.coefficient(j):.6f}")
            self.console.print(table)
            self.console.print(f"means: {minus.exact_mean():.6f} / {plus.exact_mean():.6f}, "
                               f"interval length {beta - alpha:.6f}")

        elif action == "Fejér kernel":
            delta_star = self._ask("δ*:", "0.05", float)
            D = trig.fejer_degree(delta_star)
            theta = np.linspace(0.0, 1.0, 9, endpoint=False)
            values = trig.evaluate(trig.fejer(D), theta)
            table = Table(title=f"Fejér kernel, D={D}")
            table.add_column("θ", style="cyan")
            table.add_column("F_D(θ)", style="yellow")
            for t, v in zip(theta, values):
                table.add_row(f"{t:.4f}", f"{v:.6f}")
            self.console.print(table)
            ok = trig.fejer_minorant_check(delta_star)
            self.console.print(f"[{'green' if ok else 'red'}]minorant check: {ok}[/]")

    def legendre_duality(self):
        self.console.print("\n[bold cyan]Legendre Duality[/bold cyan]")
        spec = self._require_spec()
        if spec.R == 1:
            j = (1,)
        else:
            raw = self._ask(f"Pencil j ({spec.R} integers, j_1 dominant):", "2" + ",1" * (spec.R - 1), str)
            j = tuple(int(v) for v in raw.split(","))
        family = DualFamily(spec, 1, j, weight=standard_weight(spec))
        with self.console.status("Sampling the involution identity..."):
            residual = involution_residual(family)
        self.console.print(Panel(
            f"F = {' + '.join(str(c) + '·f' + str(r) for r, c in enumerate(family.F.coefficients, start=1))}\n"
            f"max |F**(x) - F(x)| on 100 samples: {residual:.3e}",
            title=f"Dual family j={j}",
            border_style="cyan"
        ))

    def exponent_calculus(self):
        self.console.print("\n[bold cyan]Exponent Calculus[/bold cyan]")
        n = self._ask("n:", "2")
        R = self._ask("R:", "1")
        report = calculus.exponent_report(n, R)

        table = Table(title=f"Exponents for n={n}, R={R}")
        table.add_column("Quantity", style="cyan")
        table.add_column("Exact value", style="yellow")
        for key, value in report.get_status().items():
            table.add_row(key, ", ".join(map(str, value)) if isinstance(value, list) else str(value))
        self.console.print(table)

        if questionary.confirm("Show the exponent table up to this n?", default=False).ask():
            self.console.print(calculus.exponent_table(max(n, 2)), markup=False)
