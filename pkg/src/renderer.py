"""
renderer.py - Off-screen top-view rendering of scenes and traced paths.

Features:
- Floor plan from the scene facets (walls, absorbers)
- Propagation paths with glow, LoS and reflected paths colored apart
- Glowing node markers with labels
- PNG export without opening a window
"""

import os

os.environ.setdefault("SDL_VIDEODRIVER", "dummy")

import numpy as np
import pygame

from constants import COLORS, RENDER_SIZE, RENDER_MARGIN


class SceneRenderer:
    """
    Draws a scene seen from above (+z) onto a pygame surface.

    Args:
        scene: Scene to draw
        size: (width, height) of the image in pixels
    """

    def __init__(self, scene, size=RENDER_SIZE):
        self.scene = scene
        self.surface = pygame.Surface(size)
        self.width, self.height = size

        if scene.facets:
            pts = np.vstack([f.vertices for f in scene.facets])
        else:
            pts = np.array([[-1.0, -1.0, 0.0], [1.0, 1.0, 0.0]])
        self._min = pts[:, :2].min(axis=0)
        span = np.maximum(pts[:, :2].max(axis=0) - self._min, 1e-6)
        usable = np.array([self.width, self.height]) - 2 * RENDER_MARGIN
        self._scale = float(np.min(usable / span))

    def world_to_screen(self, point):
        """World (x, y) to pixel coordinates, y growing upwards on screen."""
        x = RENDER_MARGIN + (point[0] - self._min[0]) * self._scale
        y = self.height - RENDER_MARGIN - (point[1] - self._min[1]) * self._scale
        return int(round(x)), int(round(y))

    def render_facets(self):
        self.surface.fill(COLORS["background"])
        for facet in self.scene.facets:
            material = self.scene.material_of(facet)
            points = [self.world_to_screen(v) for v in facet.vertices]
            if abs(facet.normal[2]) > 0.5:
                # Floor or ceiling
                if facet.centroid[2] <= np.min([f.centroid[2] for f in self.scene.facets]) + 1e-9:
                    pygame.draw.polygon(self.surface, COLORS["floor"], points)
                continue
            color = COLORS["absorber"] if material.absorber else COLORS["wall"]
            xs = sorted(set(points))
            pygame.draw.line(self.surface, color, xs[0], xs[-1], 5 if material.absorber else 3)

    def render_paths(self, paths):
        """Draw paths; LoS in one color, reflected paths in another."""
        glow = pygame.Surface(self.surface.get_size(), pygame.SRCALPHA)
        for path in paths:
            points = [self.world_to_screen(p) for p in path.points]
            color = COLORS["path_los"] if path.order == 0 else COLORS["path_reflected"]
            pygame.draw.lines(glow, (*color, 50), False, points, 9)
        self.surface.blit(glow, (0, 0))
        for path in paths:
            points = [self.world_to_screen(p) for p in path.points]
            color = COLORS["path_los"] if path.order == 0 else COLORS["path_reflected"]
            pygame.draw.lines(self.surface, color, False, points, 2 if path.order == 0 else 1)
            for point in points[1:-1]:
                pygame.draw.circle(self.surface, color, point, 3)

    def render_marker(self, point, color, text):
        center = self.world_to_screen(point)
        glow = pygame.Surface((40, 40), pygame.SRCALPHA)
        pygame.draw.circle(glow, (*color, 70), (20, 20), 20)
        self.surface.blit(glow, (center[0] - 20, center[1] - 20))
        pygame.draw.circle(self.surface, color, center, 6)

        if not pygame.font.get_init():
            pygame.font.init()
        font = pygame.font.Font(None, 24)
        label = font.render(text, True, COLORS["text"])
        self.surface.blit(label, label.get_rect(midleft=(center[0] + 10, center[1])))

    def save(self, path):
        pygame.image.save(self.surface, path)


def render_scene(scene, out_path, markers=(), paths=()):
    """
    Render facets, paths and markers to a PNG file.

    Args:
        scene: Scene
        out_path: Image file to write
        markers: Iterable of (position, color key, label)
        paths: PropagationPaths to draw
    """
    renderer = SceneRenderer(scene)
    renderer.render_facets()
    renderer.render_paths(list(paths))
    for position, color_key, label in markers:
        renderer.render_marker(position, COLORS[color_key], label)
    renderer.save(out_path)
    return out_path
