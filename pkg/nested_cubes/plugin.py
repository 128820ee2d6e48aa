"""Plugin class"""

# Copyright (C) 2026 nested_cubes contributors
#
# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.

from typing import Optional

from .processing import ProcessingRegistry
from .provider import NestedCubesProcessingProvider


class NestedCubesPlugin:
    """Registers the nested cube algorithms with a processing registry"""

    def __init__(self, registry: Optional[ProcessingRegistry] = None):
        self.registry = registry if registry is not None else ProcessingRegistry()

    def initGui(self):
        self.provider = NestedCubesProcessingProvider()
        self.registry.addProvider(self.provider)

    def unload(self):
        self.registry.removeProvider(self.provider)
