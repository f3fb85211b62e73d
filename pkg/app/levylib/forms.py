"""Validation of run configurations.

A config is a TOML document with one table per section. Each section is a
django form; :class:`RunConfigForm` runs every one of them and collects all
errors, keyed by ``section.key``::

    form = RunConfigForm(data)
    if form.is_valid():
        config = form.cleaned_data
"""
import copy
import logging
import math
import re
import tomllib
from dataclasses import dataclass, field

import django
from django import forms
from django.conf import settings as django_settings
from django.core import validators
from django.core.exceptions import NON_FIELD_ERRORS, ValidationError

from .exceptions import ConfigError
from .levy_measure import DENSITIES, SIDES
from .montecarlo import SEED_MAX
from .settings import (
    DEFAULT_NODES_PER_SIDE,
    DEFAULT_POLY_DEGREE,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    DJANGO,
    KERNEL_FREQUENCY_CUTOFF,
    ML_MAX_TERMS,
    ML_TOLERANCE,
    PRESETS,
)

if not django_settings.configured:
    django_settings.configure(**DJANGO)
    django.setup()

logger = logging.getLogger(__name__)

COMMANDS = ('simulate-sheet', 'basis', 'chaos-check', 'whitenoise', 'ml-eval', 'solve-heat')


class GreaterThanValidator(validators.BaseValidator):
    message = 'Ensure this value is greater than %(limit_value)s.'
    code = 'min_value'

    def compare(self, a, b):
        return a <= b


class LessThanValidator(validators.BaseValidator):
    message = 'Ensure this value is less than %(limit_value)s.'
    code = 'max_value'

    def compare(self, a, b):
        return a >= b


def interval(low, high, closed_high=False, note=None):
    text = f'({low}, {high}{"]" if closed_high else ")"}' + (f': {note}' if note else '')
    message = f'%(value)s outside {text}'
    upper = validators.MaxValueValidator if closed_high else LessThanValidator
    return [GreaterThanValidator(low, message), upper(high, message)]


def nonzero(value):
    if value == 0.0:
        raise ValidationError('must be nonzero', code='zero')


def choices(values):
    return [(value, value) for value in values]


# -- fields --------------------------------------------------------------


class ListField(forms.Field):
    """A TOML array whose entries are cleaned by ``item``."""

    def __init__(self, item, min_length=1, **kwargs):
        self.item = item
        self.min_length = min_length
        super().__init__(**kwargs)

    def to_python(self, value):
        if value is None:
            return None
        if not isinstance(value, list):
            raise ValidationError('expected a list, got %(value)r', code='invalid', params={'value': value})
        if len(value) < self.min_length:
            raise ValidationError(f'needs at least {self.min_length} entries', code='min_length')
        cleaned = []
        for position, entry in enumerate(value):
            try:
                cleaned.append(self.item.clean(entry))
            except ValidationError as e:
                raise ValidationError(f'entry {position}: {"; ".join(e.messages)}', code='invalid') from None
        return cleaned


class PointField(forms.Field):
    """A number or a list of numbers; always cleaned to a list of floats."""

    def to_python(self, value):
        if value is None:
            return None
        coordinates = value if isinstance(value, list) else [value]
        return ListField(forms.FloatField()).clean(coordinates)


class AtomsField(forms.Field):
    """``[[z, w], ...]`` with ``z != 0`` and ``w > 0``."""

    def to_python(self, value):
        if value is None:
            return None
        if not isinstance(value, list) or not value:
            raise ValidationError('atoms must be a non-empty list of [z, w] pairs', code='invalid')
        atoms = []
        number = forms.FloatField()
        for position, atom in enumerate(value):
            if not isinstance(atom, list) or len(atom) != 2:
                raise ValidationError(f'atom {position}: expected [z, w]', code='invalid')
            z, w = (number.clean(v) for v in atom)
            if z == 0.0:
                raise ValidationError('atom at z=0 forbidden', code='zero_atom')
            if not w > 0.0:
                raise ValidationError(f'atom {position}: needs weight > 0', code='invalid')
            atoms.append([z, w])
        return atoms


# -- section forms -------------------------------------------------------


class SectionForm(forms.Form):
    """One config table. A field's ``initial`` stands in for a missing key."""

    def __init__(self, data, name):
        defaults = {key: copy.deepcopy(f.initial) for key, f in self.base_fields.items() if f.initial is not None}
        super().__init__({**defaults, **data})
        self.name = name
        self.unknown = sorted(set(data) - set(self.base_fields))

    def is_valid(self):
        return super().is_valid() and not self.unknown

    @property
    def cleaned(self):
        return {key: value for key, value in self.cleaned_data.items() if value not in (None, '')}

    def error_pairs(self):
        pairs = [(f'{self.name}.{key}', 'unknown key') for key in self.unknown]
        for key, errors in self.errors.get_json_data().items():
            path = self.name if key == NON_FIELD_ERRORS else f'{self.name}.{key}'
            pairs.extend((path, error['message']) for error in errors)
        return pairs


class RunForm(SectionForm):
    command = forms.ChoiceField(choices=choices(COMMANDS))
    seed = forms.IntegerField(required=False, initial=DEFAULT_SEED, min_value=0, max_value=SEED_MAX)
    workers = forms.IntegerField(required=False, initial=DEFAULT_WORKERS, min_value=1)
    n_samples = forms.IntegerField(required=False, initial=DEFAULT_SAMPLES, min_value=2)
    out = forms.CharField(required=False, strip=False)


class MeasureForm(SectionForm):
    name = forms.CharField(required=False)
    atoms = AtomsField(required=False)
    density = forms.ChoiceField(required=False, choices=choices(sorted(DENSITIES)))
    lower = forms.FloatField(required=False, validators=[GreaterThanValidator(0.0)])
    upper = forms.FloatField(required=False, validators=[GreaterThanValidator(0.0)])
    sides = forms.ChoiceField(required=False, initial='both', choices=choices(SIDES))
    scale = forms.FloatField(required=False, initial=1.0, validators=[GreaterThanValidator(0.0)])
    nodes_per_side = forms.IntegerField(required=False, initial=DEFAULT_NODES_PER_SIDE, min_value=2)
    index = forms.FloatField(required=False, validators=interval(0, 2))
    rate = forms.FloatField(required=False, validators=[GreaterThanValidator(0.0)])
    max_degree = forms.IntegerField(required=False, initial=DEFAULT_POLY_DEGREE, min_value=1)

    def clean(self):
        data = super().clean()
        if self.errors:
            return data
        if bool(data.get('atoms')) == bool(data.get('density')):
            self.add_error('atoms', 'give exactly one of atoms or density')
            return data
        if data.get('density'):
            for key in ('lower', 'upper'):
                if data.get(key) is None:
                    self.add_error(key, 'required for a density measure')
            if data.get('lower') is not None and data.get('upper') is not None and not data['lower'] < data['upper']:
                self.add_error('upper', 'must exceed lower')
            if data.get('index') is not None and data['density'] != 'truncated_stable':
                self.add_error('index', 'only applies to truncated_stable')
            if data.get('rate') is not None and data['density'] != 'tempered':
                self.add_error('rate', 'only applies to tempered')
        else:
            for key in ('density', 'lower', 'upper', 'index', 'rate'):
                if key in self.data:
                    self.add_error(key, 'only applies to density measures')
        return data


class DomainForm(SectionForm):
    lower = PointField(required=False, initial=[0.0])
    upper = PointField(required=False, initial=[1.0])

    def clean(self):
        data = super().clean()
        if self.errors:
            return data
        lower, upper = data['lower'], data['upper']
        if len(lower) != len(upper):
            self.add_error('upper', 'must have as many coordinates as lower')
        elif any(not lo < hi for lo, hi in zip(lower, upper)):
            self.add_error('upper', 'must exceed lower on every axis')
        return data


class SheetForm(SectionForm):
    kind = forms.ChoiceField(required=False, initial='levy', choices=choices(('levy', 'brownian', 'levy_ito')))
    epsilon = forms.FloatField(required=False, initial=0.0, min_value=0.0)
    grid_cells = forms.IntegerField(required=False, initial=16, min_value=1)
    drift = forms.FloatField(required=False, initial=0.0)
    brownian_scale = forms.FloatField(required=False, initial=1.0)


class BasisForm(SectionForm):
    n = forms.IntegerField(required=False, initial=1, min_value=1, max_value=2)
    count = forms.IntegerField(required=False, initial=10, min_value=1)
    theta_count = forms.IntegerField(required=False, initial=10, min_value=1)


class ChaosForm(SectionForm):
    n = forms.IntegerField(required=False, initial=1, min_value=1, max_value=2)
    half_width = forms.FloatField(required=False, initial=6.0, validators=[GreaterThanValidator(0.0)])
    n_theta = forms.IntegerField(required=False, initial=6, min_value=1)
    max_order = forms.IntegerField(required=False, initial=2, min_value=1, max_value=3)
    epsilon = forms.FloatField(required=False, initial=0.0, min_value=0.0)


class WhitenoiseForm(SectionForm):
    x = PointField(required=False, initial=[1.0])
    z = forms.FloatField(required=False, initial=1.0, validators=[nonzero])
    J = forms.IntegerField(required=False, initial=200, min_value=1)
    j_prime = forms.IntegerField(required=False, initial=2, min_value=1)
    q = forms.IntegerField(required=False, initial=2, min_value=0)
    Js = ListField(forms.IntegerField(min_value=1), required=False, initial=[25, 50, 100, 200, 400])


class MittagLefflerForm(SectionForm):
    alpha = forms.FloatField(required=False, initial=0.7, validators=interval(0, 2, closed_high=True))
    beta = forms.FloatField(required=False, initial=1.0, validators=[GreaterThanValidator(0.0)])
    z = ListField(forms.FloatField(), required=False, initial=[-40.0, -30.0, -20.0, -10.0, -1.0, 0.0, 1.0])
    tolerance = forms.FloatField(required=False, initial=ML_TOLERANCE, validators=[GreaterThanValidator(0.0)])
    max_terms = forms.IntegerField(required=False, initial=ML_MAX_TERMS, min_value=1)


class HeatForm(SectionForm):
    alpha = forms.FloatField(required=False, initial=0.7, validators=interval(0, 2, note='Caputo order'))
    lambda_diff = forms.FloatField(required=False, initial=1.0, validators=[GreaterThanValidator(0.0)])
    sigma = forms.FloatField(required=False, initial=0.0)
    gamma = forms.FloatField(required=False, initial=0.0)
    d = forms.IntegerField(required=False, initial=1, min_value=1, max_value=2)
    t = forms.FloatField(required=False, initial=1.0, validators=[GreaterThanValidator(0.0)])
    x = ListField(PointField(), required=False, initial=[[0.0]])
    time_steps = forms.IntegerField(required=False, initial=32, min_value=1)
    space_step = forms.FloatField(required=False, initial=0.1, validators=[GreaterThanValidator(0.0)])
    x_max = forms.FloatField(required=False, validators=[GreaterThanValidator(0.0)])
    frequency_cutoff = forms.FloatField(required=False, initial=KERNEL_FREQUENCY_CUTOFF,
                                        validators=[GreaterThanValidator(0.0)])

    def clean(self):
        data = super().clean()
        if self.errors:
            return data
        if any(len(point) != data['d'] for point in data['x']):
            self.add_error('x', f'every point needs {data["d"]} coordinates')
        return data


SECTION_FORMS = {
    'run': RunForm,
    'measure': MeasureForm,
    'domain': DomainForm,
    'sheet': SheetForm,
    'basis': BasisForm,
    'chaos': ChaosForm,
    'whitenoise': WhitenoiseForm,
    'mittag_leffler': MittagLefflerForm,
    'heat': HeatForm,
}

# sections validated with their defaults even when the file omits them
IMPLIED_SECTIONS = {
    'simulate-sheet': ('domain', 'sheet'),
    'basis': ('measure', 'basis'),
    'chaos-check': ('measure', 'chaos'),
    'whitenoise': ('measure', 'whitenoise'),
    'ml-eval': ('mittag_leffler',),
    'solve-heat': ('heat',),
}


@dataclass(frozen=True)
class RunConfig:
    """A validated config: run controls plus the cleaned tables of every section present."""

    command: str
    seed: int
    workers: int
    n_samples: int
    sections: dict = field(default_factory=dict)
    out: str = None

    def section(self, name):
        return self.sections.get(name, {})

    def to_dict(self):
        run = {'command': self.command, 'seed': self.seed, 'workers': self.workers, 'n_samples': self.n_samples}
        if self.out is not None:
            run['out'] = self.out
        return {'run': run, **copy.deepcopy(self.sections)}


class RunConfigForm:
    def __init__(self, data):
        self.data = data
        self.errors = {}
        self._cleaned = None

    def add_error(self, key, message):
        self.errors.setdefault(key, []).append(message)

    def is_valid(self):
        self.errors = {}
        for name in sorted(set(self.data) - set(SECTION_FORMS)):
            self.add_error(name, 'unknown section')
        if 'run' not in self.data:
            self.add_error('run', 'required section')
        run_data = self.data.get('run')
        command = run_data.get('command') if isinstance(run_data, dict) else None
        sections = {}
        for name, form_class in SECTION_FORMS.items():
            if name not in self.data and name not in IMPLIED_SECTIONS.get(command, ()):
                continue
            table = self.data.get(name, {})
            if not isinstance(table, dict):
                self.add_error(name, 'expected a table')
                continue
            form = form_class(table, name)
            if form.is_valid():
                sections[name] = form.cleaned
            else:
                for key, message in form.error_pairs():
                    self.add_error(key, message)
        sheet = sections.get('sheet', {})
        if command == 'simulate-sheet' and sheet.get('kind') != 'brownian' and 'measure' not in self.data:
            self.add_error('measure', f'required for {sheet.get("kind")} sheets')
        heat = sections.get('heat', {})
        if heat.get('gamma', 0.0) != 0.0 and 'measure' not in self.data:
            self.add_error('measure', 'required when heat.gamma != 0')
        if self.errors:
            return False
        run = sections.pop('run')
        self._cleaned = RunConfig(command=run['command'], seed=run['seed'], workers=run['workers'],
                                  n_samples=run['n_samples'], sections=sections, out=run.get('out'))
        return True

    @property
    def cleaned_data(self):
        if self._cleaned is None:
            raise AttributeError('cleaned_data is available after a successful is_valid()')
        return self._cleaned

    def error_list(self):
        return [(key, message) for key in sorted(self.errors) for message in self.errors[key]]


# -- parsing -------------------------------------------------------------


def merge(base, override):
    """Deep-merge two section mappings; ``override`` wins."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_toml(text):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = re.search(r'line (\d+)', str(e))
        line = int(match.group(1)) if match else None
        raise ConfigError([('toml', str(e))], line=line) from e


def parse_config(text, overrides=None, preset=None):
    """Parse and validate a config; raise :class:`ConfigError` listing every problem."""
    data = load_toml(text) if text else {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError([('preset', f'unknown preset {preset!r}; choose from {", ".join(sorted(PRESETS))}')])
        data = merge(PRESETS[preset], data)
    if overrides:
        data = merge(data, overrides)
    form = RunConfigForm(data)
    if not form.is_valid():
        raise ConfigError(form.error_list())
    logger.debug('validated config for %s', form.cleaned_data.command)
    return form.cleaned_data


# -- the echoed config ---------------------------------------------------


def _toml_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError(f'cannot write {value} as TOML')
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace('\\', '\\\\').replace('"', '\\"') + '"'
    if isinstance(value, list):
        return '[' + ', '.join(_toml_value(v) for v in value) + ']'
    if isinstance(value, dict):
        return '{' + ', '.join(f'{k} = {_toml_value(v)}' for k, v in value.items() if v is not None) + '}'
    raise TypeError(f'cannot write {type(value).__name__} as TOML')


def config_comment(config):
    """One-line ``# config = {...}`` echo that :func:`config_from_comment` reads back."""
    return f'# config = {_toml_value(config.to_dict())}'


def config_from_comment(line):
    data = load_toml(line.lstrip('#').strip())['config']
    form = RunConfigForm(data)
    if not form.is_valid():
        raise ConfigError(form.error_list())
    return form.cleaned_data
