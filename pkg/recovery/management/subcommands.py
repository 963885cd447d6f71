"""
Subcommands of ``manage.py sparsecert``.

Each subcommand parses its own flags, delegates to RecoveryTasks and says
how its result is printed or written to --out.
"""
import io
import json
import logging

from ..dictionary import Construction, Variant
from ..exceptions import InvalidParams
from ..serializers import render_json
from ..services import ReproduceService, RecoveryTasks, ScenarioService, TaskResult, list_claims, write_sweep_csv
from ..services.tasks import CERTIFICATES, write_dictionary, write_report, write_rows

logger = logging.getLogger(__name__)


def key_values(items, flag: str) -> dict:
    """Parse repeated key=value flags; values are read as JSON when possible."""
    parsed = {}
    for item in items or []:
        key, sep, raw = item.partition('=')
        if not sep or not key:
            raise InvalidParams(f"{flag} expects key=value (got {item!r})")
        try:
            parsed[key] = json.loads(raw)
        except json.JSONDecodeError:
            parsed[key] = raw
    return parsed


def add_dictionary_arguments(parser):
    parser.add_argument('--dict', dest='dict_path', help='Dictionary CSV (m rows, n columns)')
    parser.add_argument('--construction', choices=[c.value for c in Construction],
                        help='Generate the dictionary instead of reading --dict')
    parser.add_argument('--param', action='append', default=[],
                        help='Generator parameter as key=value (repeatable), e.g. --param k=3')
    parser.add_argument('--normalize', action='store_true',
                        help='Normalize CSV columns instead of rejecting non-unit atoms')


def dictionary_source(options) -> dict:
    if bool(options.get('dict_path')) == bool(options.get('construction')):
        raise InvalidParams('give exactly one of --dict or --construction')
    if options.get('dict_path'):
        return {'path': options['dict_path'], 'normalize': options.get('normalize', False)}
    return {'construction': options['construction'], 'params': key_values(options.get('param'), '--param')}


class Subcommand:
    name = ''
    help = ''

    def add_arguments(self, parser):
        pass

    def run(self, command, options, tol, seed, jobs):
        raise NotImplementedError

    def render(self, result) -> str:
        return render_json(result.report)

    def write(self, result, path):
        write_report(path, result.report)


class GenSubcommand(Subcommand):
    name = 'gen'
    help = 'Generate a named dictionary; --out writes the CSV plus a .json sidecar'

    def add_arguments(self, parser):
        parser.add_argument('--construction', required=True, choices=[c.value for c in Construction])
        parser.add_argument('--param', action='append', default=[],
                            help='Generator parameter as key=value (repeatable)')

    def run(self, command, options, tol, seed, jobs):
        D, meta = RecoveryTasks.load_dictionary(dictionary_source(options))
        self.dictionary = D
        return TaskResult(0, RecoveryTasks.describe(D, meta, tol))

    def render(self, result) -> str:
        return render_json({**result.report, 'atoms': self.dictionary.atoms.tolist()})

    def write(self, result, path):
        write_dictionary(path, self.dictionary, result.report)


class SolveSubcommand(Subcommand):
    name = 'solve'
    help = 'Run OMP_Q or OLS_Q from an initial support and print the trace'

    def add_arguments(self, parser):
        add_dictionary_arguments(parser)
        parser.add_argument('--y', help='Data vector CSV; drawn on --true-support from --seed when omitted')
        parser.add_argument('--init-support', default='', help='Initial support Q, e.g. "0,3"')
        parser.add_argument('--variant', choices=[v.value for v in Variant], default='omp')
        parser.add_argument('--ties', choices=['adversarial', 'lex'], default='adversarial')
        parser.add_argument('--true-support', help='True support Q*; enables success reporting')
        parser.add_argument('--max-iterations', type=int)

    def run(self, command, options, tol, seed, jobs):
        D, _ = RecoveryTasks.load_dictionary(dictionary_source(options))
        return RecoveryTasks.solve(D, {
            'y': options['y'],
            'init_support': options['init_support'],
            'variant': options['variant'],
            'ties': options['ties'],
            'true_support': options['true_support'],
            'max_iterations': options['max_iterations'],
        }, seed, tol)


class CheckSubcommand(Subcommand):
    name = 'check'
    help = 'Evaluate recovery certificates against their thresholds'

    def add_arguments(self, parser):
        add_dictionary_arguments(parser)
        parser.add_argument('--cert', action='append', choices=CERTIFICATES,
                            help='Certificate to evaluate (repeatable, default mu)')
        parser.add_argument('--k', type=int)
        parser.add_argument('--g', type=int)
        parser.add_argument('--b', type=int)
        parser.add_argument('--p', type=float, default=1.0)
        parser.add_argument('--variant', choices=[v.value for v in Variant], default='omp')
        parser.add_argument('--Qstar', dest='q_star', help='True support for erc')
        parser.add_argument('--Q', dest='q', help='Initial support for erc')
        parser.add_argument('--order', type=int, help='RIC order (default k+b+1)')
        parser.add_argument('--l', type=int, help='Projection size for prip and proj-coherence (default g+b)')
        parser.add_argument('--q-size', type=int, help='Block size for prip (default k-g)')
        parser.add_argument('--bound', help='Analytic bound name for --cert bounds')
        parser.add_argument('--value', action='append', default=[],
                            help='Bound argument as key=value for --cert bounds (repeatable)')

    def run(self, command, options, tol, seed, jobs):
        certs = options['cert'] or ['mu']
        if certs == ['bounds'] and not (options.get('dict_path') or options.get('construction')):
            # closed-form bounds need no dictionary
            return RecoveryTasks.check(None, self._params(options, certs), None, seed, tol)
        D, meta = RecoveryTasks.load_dictionary(dictionary_source(options))
        return RecoveryTasks.check(D, self._params(options, certs), meta, seed, tol)

    def _params(self, options, certs) -> dict:
        params = {key: options[key] for key in ('k', 'g', 'b', 'order', 'l', 'q_size') if options[key] is not None}
        params.update(cert=certs, p=options['p'], variant=options['variant'], bound=options['bound'],
                      values=key_values(options['value'], '--value'))
        if options['q_star'] is not None:
            params['Qstar'] = options['q_star']
        if options['q'] is not None:
            params['Q'] = options['q']
        return params


class RelaxSubcommand(Subcommand):
    name = 'relax'
    help = 'Verify that x* solves the informed lp problem (solving the l0 problem first without --x-star)'

    def add_arguments(self, parser):
        add_dictionary_arguments(parser)
        parser.add_argument('--y', help='Data vector CSV (used when --x-star is omitted)')
        parser.add_argument('--Q', dest='q', default='', help='Informed support Q')
        parser.add_argument('--p', type=float, default=1.0)
        parser.add_argument('--x-star', help='Candidate solution CSV')
        parser.add_argument('--max-extra', type=int, help='Largest extra support tried by the l0 search')

    def run(self, command, options, tol, seed, jobs):
        D, _ = RecoveryTasks.load_dictionary(dictionary_source(options))
        return RecoveryTasks.relax(D, {
            'y': options['y'], 'Q': options['q'], 'p': options['p'],
            'x_star': options['x_star'], 'max_extra': options['max_extra'],
        }, tol)


class ReproduceSubcommand(Subcommand):
    name = 'reproduce'
    help = 'Run registered reproduction claims (all of them when none is named)'

    def add_arguments(self, parser):
        parser.add_argument('claims', nargs='*', help='Claim ids')
        parser.add_argument('--list', action='store_true', dest='list_claims', help='List registered claims and exit')
        parser.add_argument('--record', action='store_true', help='Store each report as a ClaimRun')
        parser.add_argument('--timings', action='store_true', help='Include runtime_s in the report')
        parser.add_argument('--override', action='append', default=[],
                            help='Claim parameter as claim.key=value (repeatable), e.g. lemma9.k_values=[2]')

    def run(self, command, options, tol, seed, jobs):
        if options['list_claims']:
            return TaskResult(0, {'claims': [
                {'claim_id': claim.claim_id, 'description': claim.description, 'defaults': claim.defaults}
                for claim in list_claims()
            ]})
        overrides = {}
        for key, value in key_values(options['override'], '--override').items():
            claim_id, sep, name = key.partition('.')
            if not sep or not name:
                raise InvalidParams(f"--override expects claim.key=value (got {key!r})")
            overrides.setdefault(claim_id, {})[name] = value
        result = RecoveryTasks.reproduce({'claims': options['claims'], 'overrides': overrides},
                                         seed, tol, jobs, timings=options['timings'])
        if options['record']:
            runs = ReproduceService.record(result.rows, seed)
            command.stderr.write(f"Recorded {len(runs)} claim run(s)")
        return result


class SweepSubcommand(Subcommand):
    name = 'sweep'
    help = 'Sweep certificates and greedy success rates over a (k, g, b) grid; prints CSV'

    def add_arguments(self, parser):
        parser.add_argument('--construction', required=True, choices=[c.value for c in Construction])
        parser.add_argument('--param', action='append', default=[],
                            help='Generator parameter for fixed-shape constructions, as key=value')
        parser.add_argument('--k', nargs='+', type=int, default=[2])
        parser.add_argument('--g', nargs='+', type=int, default=[0])
        parser.add_argument('--b', nargs='+', type=int, default=[0])
        parser.add_argument('--draws', type=int, default=1, help='Coefficient draws per admissible pair')

    def run(self, command, options, tol, seed, jobs):
        return RecoveryTasks.sweep({
            'construction': options['construction'],
            'params': key_values(options['param'], '--param'),
            'k': options['k'], 'g': options['g'], 'b': options['b'], 'draws': options['draws'],
        }, seed=seed, tol=tol, jobs=jobs)

    def render(self, result) -> str:
        stream = io.StringIO()
        write_sweep_csv(result.rows, stream)
        return stream.getvalue().rstrip('\n')

    def write(self, result, path):
        write_rows(path, result.rows)


class ScenarioSubcommand(Subcommand):
    name = 'scenario'
    help = 'Run a JSON scenario file'

    def add_arguments(self, parser):
        parser.add_argument('file', help='Scenario JSON file')

    def run(self, command, options, tol, seed, jobs):
        scenario = ScenarioService.load(options['file'])
        if options['seed'] is not None:
            scenario['seed'] = options['seed']
        return ScenarioService.run(scenario, tol, jobs)


SUBCOMMANDS = {
    subcommand.name: subcommand
    for subcommand in (
        GenSubcommand, SolveSubcommand, CheckSubcommand, RelaxSubcommand,
        ReproduceSubcommand, SweepSubcommand, ScenarioSubcommand,
    )
}
